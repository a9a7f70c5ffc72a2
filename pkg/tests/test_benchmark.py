import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dcflow import (
    Cell,
    Table,
    delta_equiv,
    inject_errors,
    load_case,
    load_suite,
    table_to_csv,
    validate_case,
)
from dcflow.benchmark import (
    ErrorFamily,
    ErrorLog,
    ErrorProfile,
    assert_case_valid,
)
from dcflow.errors import NoEligibleCellsError, SchemaError, SelfCheckError


def clean_table(n_rows=50):
    rows = []
    for i in range(n_rows):
        rows.append(
            [
                Cell.text(f"Name {i} Value"),
                Cell.text(str(100 + i)),
                Cell.text("keep me"),
            ]
        )
    return Table.from_rows(["name", "amount", "other"], rows)


def profile(rate, seed=1, columns=("name", "amount")):
    return ErrorProfile(rate=rate, columns=tuple(columns), seed=seed)


def test_rate_zero_is_identity():
    t = clean_table()
    dirty, log = inject_errors(t, profile(0.0))
    assert dirty == t
    assert log.entries == ()


def test_same_seed_same_output():
    t = clean_table()
    a = inject_errors(t, profile(0.3, seed=42))
    b = inject_errors(t, profile(0.3, seed=42))
    assert table_to_csv(a[0]) == table_to_csv(b[0])
    assert a[1] == b[1]


def test_different_seed_differs():
    t = clean_table()
    a = inject_errors(t, profile(0.3, seed=1))
    b = inject_errors(t, profile(0.3, seed=2))
    assert table_to_csv(a[0]) != table_to_csv(b[0])


@pytest.mark.parametrize("rate", [0.0636, 0.1480, 0.2584, 0.3451, 0.1463, 0.2307])
def test_realized_rate_within_one_cell(rate):
    t = clean_table(50)
    dirty, log = inject_errors(t, profile(rate, seed=9))
    total = t.n_rows * 2
    assert abs(len(log.entries) - rate * total) <= 1.0


def test_injection_preserves_shape_and_names():
    t = clean_table()
    dirty, _ = inject_errors(t, profile(0.5))
    assert dirty.columns == t.columns
    assert dirty.n_rows == t.n_rows


def test_log_entries_address_real_cells():
    t = clean_table()
    dirty, log = inject_errors(t, profile(0.4, seed=5))
    assert log.entries
    for e in log.entries:
        j = t.column_index(e.column)
        assert dirty.rows[e.row][j] == e.corrupted
        assert t.rows[e.row][j] == e.original
        assert e.corrupted.render() != e.original.render()


def test_untargeted_columns_untouched():
    t = clean_table()
    dirty, _ = inject_errors(t, profile(1.0, columns=("name",)))
    j = t.column_index("other")
    assert all(row[j].render() == "keep me" for row in dirty.rows)


def test_family_type_constraints():
    t = clean_table()
    dirty, log = inject_errors(t, profile(1.0, seed=3))
    for e in log.entries:
        if e.family is ErrorFamily.TYPE_ERROR:
            assert e.corrupted.render() in ("N/A", "missing", "-", "unknown")
            assert e.original.render().lstrip("+-").replace(".", "").replace(",", "").isdigit()
        if e.family is ErrorFamily.CASE_VARIATION:
            assert e.corrupted.render().lower() == e.original.render().lower()
        if e.family is ErrorFamily.FORMATTING:
            assert e.corrupted.render().strip() == e.original.render().strip()


def test_no_eligible_cells_raises():
    t = Table.from_rows(["a"], [[Cell.missing()], [Cell.missing()]])
    with pytest.raises(NoEligibleCellsError):
        inject_errors(t, ErrorProfile(rate=1.0, columns=("a",), seed=0))


def test_profile_validation():
    with pytest.raises(ValueError):
        ErrorProfile(rate=1.5, columns=("a",))
    with pytest.raises(ValueError):
        ErrorProfile(rate=0.5, columns=())
    with pytest.raises(ValueError):
        ErrorProfile(
            rate=0.5,
            columns=("a",),
            mix={ErrorFamily.FORMATTING: 0.7, ErrorFamily.CASE_VARIATION: 0.7},
        )


def test_profile_from_json():
    p = ErrorProfile.from_json(
        {"rate": 0.25, "columns": ["a"], "seed": 7, "mix": {"formatting": 1.0}}
    )
    assert p.rate == 0.25
    assert p.mix == {ErrorFamily.FORMATTING: 1.0}
    with pytest.raises(SchemaError):
        ErrorProfile.from_json({"rate": 0.25, "columns": ["a"], "mix": {"bogus": 1.0}})


def test_error_log_json_round_trip():
    t = clean_table(10)
    _, log = inject_errors(t, profile(0.5, seed=2))
    doc = log.to_json()
    back = ErrorLog.from_json(json.loads(json.dumps(doc)))
    assert [
        (e.row, e.column, e.original.render(), e.corrupted.render(), e.family)
        for e in back.entries
    ] == [
        (e.row, e.column, e.original.render(), e.corrupted.render(), e.family)
        for e in log.entries
    ]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 100_000), st.floats(0.0, 1.0))
def test_injection_rate_property(seed, rate):
    t = clean_table(20)
    dirty, log = inject_errors(t, profile(rate, seed=seed))
    total = 40
    assert abs(len(log.entries) - rate * total) <= 1.0
    # every corrupted cell fails equivalence against its original
    for e in log.entries:
        assert delta_equiv(e.corrupted, e.original) in (0, 1)


# case manifests ---------------------------------------------------------

def test_bundled_suite_all_valid(suite_path):
    entries = load_suite(suite_path)
    assert len(entries) == 8
    for entry in entries:
        case = load_case(entry.path)
        assert validate_case(case) == []


def test_assert_case_valid_raises_on_gold_mismatch(cases_dir, tmp_path):
    case_doc = json.loads((cases_dir / "menu" / "case.json").read_text())
    case_doc["purpose"]["gold_answer"] = {"type": "scalar", "value": 99}
    for name in ("raw.csv", "gold.csv", "silver.json"):
        (tmp_path / name).write_bytes((cases_dir / "menu" / name).read_bytes())
    bad = tmp_path / "case.json"
    bad.write_text(json.dumps(case_doc))
    case = load_case(bad)
    findings = validate_case(case)
    assert any("gold answer mismatch" in f for f in findings)
    with pytest.raises(SelfCheckError):
        assert_case_valid(case)


def test_validate_reports_silver_step_failure(cases_dir, tmp_path):
    case_doc = json.loads((cases_dir / "menu" / "case.json").read_text())
    silver = json.loads((cases_dir / "menu" / "silver.json").read_text())
    silver["steps"][1]["column"] = "no_such_column"
    for name in ("raw.csv", "gold.csv"):
        (tmp_path / name).write_bytes((cases_dir / "menu" / name).read_bytes())
    (tmp_path / "silver.json").write_text(json.dumps(silver))
    (tmp_path / "case.json").write_text(json.dumps(case_doc))
    findings = validate_case(load_case(tmp_path / "case.json"))
    assert any("step 2" in f for f in findings)


def test_load_case_missing_file(tmp_path):
    doc = {
        "purpose": {
            "id": "x",
            "statement": "s",
            "category": "Filtering",
            "target_columns": ["a"],
            "query": {"select": ["a"]},
            "gold_answer": {"type": "list", "values": []},
        },
        "raw_table": "missing.csv",
        "gold_table": "missing.csv",
        "silver_workflow": "missing.json",
    }
    p = tmp_path / "case.json"
    p.write_text(json.dumps(doc))
    with pytest.raises(SchemaError):
        load_case(p)


def test_error_log_validation_catches_drift(cases_dir, tmp_path):
    import shutil

    for name in ("raw.csv", "gold.csv", "silver_b.json", "case_b.json"):
        shutil.copy(cases_dir / "cfi" / name, tmp_path / name)
    log = json.loads((cases_dir / "cfi" / "error_log_b.json").read_text())
    log[0]["corrupted"] = "NOT WHAT THE TABLE SAYS"
    (tmp_path / "error_log_b.json").write_text(json.dumps(log))
    findings = validate_case(load_case(tmp_path / "case_b.json"))
    assert any("error_log[0]" in f for f in findings)
