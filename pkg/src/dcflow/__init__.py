"""Purpose-driven table cleaning: deterministic operations, replayable
workflows, an LLM agent loop, and a benchmark harness."""

from .cells import Cell, CellKind, format_date, format_number, parse_date, parse_number
from .table import ColumnView, Table, get_column, load_table, table_to_csv
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
from .transform import TransformExpr, eval_transform_expr, parse_transform_expr
from .workflow import (
    History,
    OpSpec,
    OpStats,
    Workflow,
    apply_step,
    deserialize,
    op_stats,
    record,
    replay,
    serialize,
)
from .query import (
    Answer,
    AnswerKind,
    Purpose,
    PurposeCategory,
    QuerySpec,
    answer_to_canonical_text,
    answers_equal,
    execute_purpose,
)
from .evaluation import (
    AnswerScores,
    CaseResult,
    ColumnScores,
    EvalReport,
    WorkflowScores,
    aggregate,
    delta_equiv,
    eval_answer,
    eval_columns,
    eval_workflow,
    similarity,
)
from .benchmark import (
    CaseManifest,
    ErrorFamily,
    ErrorLog,
    ErrorProfile,
    assert_case_valid,
    inject_errors,
    load_case,
    load_suite,
    validate_case,
)
from . import errors

__version__ = "0.1.0"

__all__ = [
    "Cell",
    "CellKind",
    "format_date",
    "format_number",
    "parse_date",
    "parse_number",
    "ColumnView",
    "Table",
    "get_column",
    "load_table",
    "table_to_csv",
    "MassEdit",
    "MassEditSpec",
    "OpKind",
    "apply_date",
    "apply_mass_edit",
    "apply_numeric",
    "apply_regexr_transform",
    "apply_trim",
    "apply_upper",
    "TransformExpr",
    "eval_transform_expr",
    "parse_transform_expr",
    "History",
    "OpSpec",
    "OpStats",
    "Workflow",
    "apply_step",
    "deserialize",
    "op_stats",
    "record",
    "replay",
    "serialize",
    "Answer",
    "AnswerKind",
    "Purpose",
    "PurposeCategory",
    "QuerySpec",
    "answer_to_canonical_text",
    "answers_equal",
    "execute_purpose",
    "AnswerScores",
    "CaseResult",
    "ColumnScores",
    "EvalReport",
    "WorkflowScores",
    "aggregate",
    "delta_equiv",
    "eval_answer",
    "eval_columns",
    "eval_workflow",
    "similarity",
    "CaseManifest",
    "ErrorFamily",
    "ErrorLog",
    "ErrorProfile",
    "assert_case_valid",
    "inject_errors",
    "load_case",
    "load_suite",
    "validate_case",
    "errors",
    "__version__",
]
