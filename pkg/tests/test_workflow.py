import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dcflow import (
    Cell,
    MassEditSpec,
    OpKind,
    OpSpec,
    Table,
    Workflow,
    apply_step,
    deserialize,
    op_stats,
    record,
    replay,
    serialize,
)
from dcflow.errors import ReplayError, SchemaError, UnknownColumnError

from genutil import random_table, random_workflow


@pytest.fixture
def small_table():
    return Table.from_rows(
        ["Facility Type", "Risk"],
        [
            [Cell.text(" RESTUARANT "), Cell.text("Risk 1 (High)")],
            [Cell.text("SCHOOL"), Cell.text("Risk 3 (Low)")],
        ],
    )


def test_record_appends_with_next_index(small_table):
    wf = Workflow(source_table_id="t")
    wf = record(wf, OpSpec(OpKind.TRIM, "Facility Type"), small_table)
    assert len(wf.steps) == 1
    assert wf.steps[0].step_index == 1
    wf = record(wf, OpSpec(OpKind.UPPER, "Facility Type"), small_table)
    assert [s.step_index for s in wf.steps] == [1, 2]


def test_record_then_replay_matches_direct_application(small_table):
    s1 = OpSpec(OpKind.TRIM, "Facility Type")
    s2 = OpSpec(OpKind.UPPER, "Facility Type")
    wf = record(record(Workflow(), s1, small_table), s2, small_table)
    direct = apply_step(apply_step(small_table, s1), s2)
    assert replay(wf, small_table).final == direct


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_record_replay_coherence_property(seed):
    from genutil import random_step

    rng = random.Random(seed)
    table = random_table(rng, max_rows=6)
    s1 = random_step(rng, list(table.columns))
    s2 = random_step(rng, list(table.columns))
    wf = record(record(Workflow(), s1, table), s2, table)
    assert replay(wf, table).final == apply_step(apply_step(table, s1), s2)


def test_record_validates_against_replayed_frontier(small_table):
    wf = Workflow()
    with pytest.raises(UnknownColumnError):
        record(wf, OpSpec(OpKind.TRIM, "Nope"), small_table)


def test_replay_empty_workflow_is_identity(small_table):
    history = replay(Workflow(), small_table)
    assert history.tables == (small_table,)
    assert history.final == small_table


def test_replay_error_carries_step_index(small_table):
    wf = Workflow(steps=(OpSpec(OpKind.TRIM, "Facility Type"), OpSpec(OpKind.TRIM, "Ghost")))
    with pytest.raises(ReplayError) as exc:
        replay(wf, small_table)
    assert exc.value.step_index == 2


def test_history_prefix_property(small_table):
    rng = random.Random(7)
    table = random_table(rng, max_rows=5)
    wf = random_workflow(rng, table, max_steps=6)
    full = replay(wf, table)
    for k in range(len(wf.steps) + 1):
        prefix = Workflow(wf.steps[:k], wf.source_table_id, wf.purpose_id)
        assert replay(prefix, table).tables == full.tables[: k + 1]


def test_serialize_round_trip_identity(small_table):
    wf = Workflow(
        steps=(
            OpSpec(OpKind.TRIM, "Facility Type", rationale="spaces"),
            OpSpec(
                OpKind.MASS_EDIT,
                "Facility Type",
                MassEditSpec.of([(["RESTUARANT"], "RESTAURANT")]),
            ),
        ),
        source_table_id="cfi/raw.csv",
        purpose_id="p1",
    )
    assert deserialize(serialize(wf)) == wf


def test_serialize_is_canonical_utf8_newline_terminated():
    wf = Workflow(steps=(OpSpec(OpKind.TRIM, "a"),), source_table_id="t")
    data = serialize(wf)
    assert data.endswith(b"\n")
    doc = json.loads(data)
    assert doc["version"] == "dcflow/1"
    assert list(doc) == ["version", "source_table_id", "purpose_id", "steps"]


def test_deserialize_unknown_op():
    doc = {
        "version": "dcflow/1",
        "source_table_id": "t",
        "purpose_id": None,
        "steps": [{"index": 1, "op": "delete_rows", "column": "a", "args": None, "rationale": None}],
    }
    with pytest.raises(SchemaError) as exc:
        deserialize(json.dumps(doc).encode())
    assert "steps[0].op" in str(exc.value)


def test_deserialize_mass_edit_requires_edits():
    doc = {
        "version": "dcflow/1",
        "source_table_id": "t",
        "purpose_id": None,
        "steps": [{"index": 1, "op": "mass_edit", "column": "a", "args": {}, "rationale": None}],
    }
    with pytest.raises(SchemaError):
        deserialize(json.dumps(doc).encode())


def test_deserialize_bad_version():
    with pytest.raises(SchemaError):
        deserialize(b'{"version": "nope", "steps": []}')


def test_op_stats_ground_truth_shape():
    steps = (
        OpSpec(OpKind.TRIM, "Facility Type"),
        OpSpec(OpKind.UPPER, "Facility Type"),
        OpSpec(OpKind.MASS_EDIT, "Facility Type", MassEditSpec.of([(["a"], "b")])),
        OpSpec(OpKind.MASS_EDIT, "Facility Type", MassEditSpec.of([(["c"], "d")])),
        OpSpec(OpKind.MASS_EDIT, "Facility Type", MassEditSpec.of([(["e"], "f")])),
        OpSpec(OpKind.REGEXR_TRANSFORM, "Inspection ID", _year_expr()),
        OpSpec(OpKind.NUMERIC, "Inspection ID"),
        OpSpec(OpKind.DATE, "Inspection Date"),
    )
    stats = op_stats(Workflow(steps))
    assert stats.list_length == 8
    assert stats.set_length == 6
    assert stats.counts["mass_edit"] == 3


def _year_expr():
    from dcflow import parse_transform_expr

    return parse_transform_expr(
        "jython: import re\nmatch = re.search(r'\\b\\d{4}\\b', value)\nif match:\n    return match.group(0)"
    )


def test_op_stats_empty():
    stats = op_stats(Workflow())
    assert (stats.list_length, stats.set_length, stats.counts) == (0, 0, {})


def test_op_stats_repeated_single_op():
    wf = Workflow(tuple(OpSpec(OpKind.TRIM, "a") for _ in range(3)))
    stats = op_stats(wf)
    assert (stats.list_length, stats.set_length) == (3, 1)
    assert stats.counts == {"trim": 3}


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_serialize_round_trip_property(seed):
    rng = random.Random(seed)
    table = random_table(rng)
    wf = random_workflow(rng, table)
    data = serialize(wf)
    assert deserialize(data) == wf
    assert serialize(deserialize(data)) == data


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_replay_deterministic_in_process(seed):
    rng = random.Random(seed)
    table = random_table(rng, max_rows=6)
    wf = random_workflow(rng, table, max_steps=5)
    a = replay(wf, table)
    b = replay(wf, table)
    assert a == b
