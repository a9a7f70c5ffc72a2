"""Recordable, replayable operation sequences.

A workflow is an ordered list of steps over a named source table. Replay is
deterministic: the same workflow applied to the same input always produces
the same history of intermediate tables. The serialized form is JSON with
schema version ``dcflow/1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Any, Iterable

from .errors import DcflowError, OverlappingEditError, ParseError, ReplayError, SchemaError
from .ops import (
    MassEdit,
    MassEditSpec,
    OpKind,
    apply_date,
    apply_mass_edit,
    apply_numeric,
    apply_regexr_transform,
    apply_trim,
    apply_upper,
)
from .table import Table
from .transform import TransformExpr, parse_transform_expr

SCHEMA_VERSION = "dcflow/1"

_ARGLESS = (OpKind.UPPER, OpKind.TRIM, OpKind.NUMERIC, OpKind.DATE)


@dataclass(frozen=True)
class OpSpec:
    """One recorded operation. ``step_index`` is 1-based within a workflow."""

    op: OpKind
    column: str
    args: MassEditSpec | TransformExpr | None = None
    rationale: str | None = None
    step_index: int = 0

    def __post_init__(self):
        if self.op in _ARGLESS and self.args is not None:
            raise ValueError(f"{self.op.value} takes no arguments")
        if self.op is OpKind.MASS_EDIT and not isinstance(self.args, MassEditSpec):
            raise ValueError("mass_edit requires a MassEditSpec")
        if self.op is OpKind.REGEXR_TRANSFORM and not isinstance(self.args, TransformExpr):
            raise ValueError("regexr_transform requires a TransformExpr")


def apply_step(table: Table, step: OpSpec) -> Table:
    if step.op is OpKind.UPPER:
        return apply_upper(table, step.column)
    if step.op is OpKind.TRIM:
        return apply_trim(table, step.column)
    if step.op is OpKind.NUMERIC:
        return apply_numeric(table, step.column)
    if step.op is OpKind.DATE:
        return apply_date(table, step.column)
    if step.op is OpKind.MASS_EDIT:
        return apply_mass_edit(table, step.column, step.args)
    return apply_regexr_transform(table, step.column, step.args)


@dataclass(frozen=True)
class Workflow:
    steps: tuple[OpSpec, ...] = ()
    source_table_id: str = ""
    purpose_id: str | None = None

    def __post_init__(self):
        renumbered = tuple(
            replace(s, step_index=i + 1) if s.step_index == 0 else s
            for i, s in enumerate(self.steps)
        )
        object.__setattr__(self, "steps", renumbered)
        for i, s in enumerate(self.steps):
            if s.step_index != i + 1:
                raise ValueError(f"step_index {s.step_index} at position {i}; must be {i + 1}")


@dataclass(frozen=True)
class History:
    """Tables D0..Dn aligned with a workflow's steps; tables[0] is the input."""

    tables: tuple[Table, ...]

    @property
    def final(self) -> Table:
        return self.tables[-1]


def record(workflow: Workflow, step: OpSpec, source_table: Table) -> Workflow:
    """Append a step after validating it against the replayed frontier.

    The prefix is replayed rather than trusting any caller-held table, so a
    stale frontier cannot sneak an invalid step into the workflow.
    """
    frontier = replay(workflow, source_table).final
    frontier.column_index(step.column)
    new_step = replace(step, step_index=len(workflow.steps) + 1)
    return replace(workflow, steps=workflow.steps + (new_step,))


def replay(workflow: Workflow, table: Table) -> History:
    tables = [table]
    for step in workflow.steps:
        try:
            tables.append(apply_step(tables[-1], step))
        except DcflowError as exc:
            raise ReplayError(step.step_index, exc) from exc
    return History(tuple(tables))


def op_counts(steps: Iterable[OpSpec]) -> dict[str, int]:
    steps = tuple(steps)
    counts: dict[str, int] = {}
    for op in OpKind:
        n = sum(1 for s in steps if s.op is op)
        if n:
            counts[op.value] = n
    return counts


@dataclass(frozen=True)
class OpStats:
    list_length: int
    set_length: int
    counts: dict[str, int] = field(default_factory=dict)


def op_stats(workflow: Workflow) -> OpStats:
    counts = op_counts(workflow.steps)
    return OpStats(len(workflow.steps), len(counts), counts)


def _args_to_json(step: OpSpec) -> Any:
    if step.args is None:
        return None
    if isinstance(step.args, MassEditSpec):
        return {
            "edits": [
                {"from": list(e.from_values), "to": e.to} for e in step.args.edits
            ]
        }
    return {"expression": step.args.source}


def serialize(workflow: Workflow) -> bytes:
    doc = {
        "version": SCHEMA_VERSION,
        "source_table_id": workflow.source_table_id,
        "purpose_id": workflow.purpose_id,
        "steps": [
            {
                "index": s.step_index,
                "op": s.op.value,
                "column": s.column,
                "args": _args_to_json(s),
                "rationale": s.rationale,
            }
            for s in workflow.steps
        ],
    }
    return (json.dumps(doc, ensure_ascii=False, indent=2) + "\n").encode("utf-8")


def _parse_args(op: OpKind, raw: Any, path: str) -> MassEditSpec | TransformExpr | None:
    if op is OpKind.MASS_EDIT:
        if not isinstance(raw, dict) or "edits" not in raw:
            raise SchemaError(path, "mass_edit requires an 'edits' argument object")
        edits = raw["edits"]
        if not isinstance(edits, list):
            raise SchemaError(f"{path}.edits", "must be a list")
        parsed = []
        for i, e in enumerate(edits):
            if (
                not isinstance(e, dict)
                or not isinstance(e.get("from"), list)
                or not all(isinstance(v, str) for v in e.get("from", []))
                or not isinstance(e.get("to"), str)
            ):
                raise SchemaError(f"{path}.edits[{i}]", "must be {'from': [str], 'to': str}")
            parsed.append(MassEdit(tuple(e["from"]), e["to"]))
        try:
            return MassEditSpec(tuple(parsed))
        except OverlappingEditError as exc:
            raise SchemaError(f"{path}.edits", str(exc)) from exc
    if op is OpKind.REGEXR_TRANSFORM:
        if not isinstance(raw, dict) or not isinstance(raw.get("expression"), str):
            raise SchemaError(path, "regexr_transform requires an 'expression' argument")
        try:
            return parse_transform_expr(raw["expression"])
        except ParseError as exc:
            raise SchemaError(f"{path}.expression", str(exc)) from exc
    if raw is not None:
        raise SchemaError(path, f"{op.value} takes no arguments")
    return None


def deserialize(data: bytes) -> Workflow:
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaError("$", f"not a UTF-8 JSON document: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("$", "top level must be an object")
    if doc.get("version") != SCHEMA_VERSION:
        raise SchemaError("version", f"expected {SCHEMA_VERSION!r}, got {doc.get('version')!r}")
    source_table_id = doc.get("source_table_id", "")
    if not isinstance(source_table_id, str):
        raise SchemaError("source_table_id", "must be a string")
    purpose_id = doc.get("purpose_id")
    if purpose_id is not None and not isinstance(purpose_id, str):
        raise SchemaError("purpose_id", "must be a string or null")
    raw_steps = doc.get("steps")
    if not isinstance(raw_steps, list):
        raise SchemaError("steps", "must be a list")
    steps = []
    for i, raw in enumerate(raw_steps):
        path = f"steps[{i}]"
        if not isinstance(raw, dict):
            raise SchemaError(path, "must be an object")
        op_name = raw.get("op")
        try:
            op = OpKind(op_name)
        except ValueError:
            raise SchemaError(f"{path}.op", f"unknown operation {op_name!r}") from None
        column = raw.get("column")
        if not isinstance(column, str):
            raise SchemaError(f"{path}.column", "must be a string")
        if raw.get("index") != i + 1:
            raise SchemaError(f"{path}.index", f"must be {i + 1}")
        rationale = raw.get("rationale")
        if rationale is not None and not isinstance(rationale, str):
            raise SchemaError(f"{path}.rationale", "must be a string or null")
        args = _parse_args(op, raw.get("args"), f"{path}.args")
        steps.append(OpSpec(op, column, args, rationale, i + 1))
    return Workflow(tuple(steps), source_table_id, purpose_id)
