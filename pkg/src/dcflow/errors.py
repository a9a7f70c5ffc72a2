"""Exception types shared across the package."""

from __future__ import annotations


class DcflowError(Exception):
    """Base class for all package errors."""


class EncodingError(DcflowError):
    """Input bytes are not valid UTF-8."""


class EmptyInputError(DcflowError):
    """An operation received an input with nothing to work on."""


class RowArityError(DcflowError):
    """A row's cell count does not match the column count."""

    def __init__(self, row: int, expected: int, got: int):
        super().__init__(f"row {row} has {got} cells, expected {expected}")
        self.row = row
        self.expected = expected
        self.got = got


class DuplicateColumnError(DcflowError):
    def __init__(self, name: str):
        super().__init__(f"duplicate column name: {name!r}")
        self.name = name


class UnknownColumnError(DcflowError):
    def __init__(self, name: str, available: tuple[str, ...] = ()):
        msg = f"unknown column: {name!r}"
        if available:
            msg += f" (available: {', '.join(available)})"
        super().__init__(msg)
        self.name = name
        self.available = tuple(available)


class OverlappingEditError(DcflowError):
    """A value appears in more than one replacement group."""


class ParseError(DcflowError):
    """A transform snippet fell outside the accepted grammar."""

    def __init__(self, position: int, expected: str):
        super().__init__(f"parse error at offset {position}: expected {expected}")
        self.position = position
        self.expected = expected


class SchemaError(DcflowError):
    """A serialized document does not match its schema."""

    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


class ReplayError(DcflowError):
    """A workflow step failed during replay."""

    def __init__(self, step_index: int, cause: Exception):
        super().__init__(f"step {step_index} failed: {cause}")
        self.step_index = step_index
        self.cause = cause


class ShapeMismatchError(DcflowError):
    """Two tables that must align have different shapes."""


class TypeMismatchError(DcflowError):
    """A filter literal is incompatible with its comparator."""

    def __init__(self, column: str, comparator: str):
        super().__init__(f"filter on {column!r}: literal incompatible with {comparator!r}")
        self.column = column
        self.comparator = comparator


class NoEligibleCellsError(DcflowError):
    """Error injection found no cell any family could corrupt."""


class SelfCheckError(DcflowError):
    """A benchmark case failed its internal consistency checks."""

    def __init__(self, findings: list[str]):
        super().__init__("; ".join(findings))
        self.findings = list(findings)


class SelectionError(DcflowError):
    """The column-selection stage produced nothing usable."""


class InspectionError(DcflowError):
    """The quality-inspection stage produced nothing usable."""


class OpChoiceError(DcflowError):
    """The operation-choice stage produced nothing usable."""


class ArgGenError(DcflowError):
    """The argument-generation stage produced nothing usable."""


class BackendError(DcflowError):
    """A completion backend failed to produce a response."""


class ScriptExhaustedError(BackendError):
    """The scripted backend has no entry matching the current call."""
