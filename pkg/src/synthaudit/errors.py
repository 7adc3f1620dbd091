"""Exception hierarchy shared by every evaluation stage."""

from __future__ import annotations


class SynthAuditError(Exception):
    """Base class for all package errors."""


class DataError(SynthAuditError):
    """Input data violates a contract (exit code 1 at the CLI)."""


class EmptyFile(DataError):
    pass


class MissingColumn(DataError):
    def __init__(self, column: str, where: str = "") -> None:
        self.column = column
        msg = f"missing column {column!r}"
        super().__init__(f"{msg} in {where}" if where else msg)


class UnknownColumn(DataError):
    def __init__(self, column: str) -> None:
        self.column = column
        super().__init__(f"unknown column {column!r}")


class KindMismatch(DataError):
    def __init__(self, column: str, expected: str, actual: str) -> None:
        self.column = column
        super().__init__(f"column {column!r} is {actual}, expected {expected}")


class TypeParseError(DataError):
    def __init__(self, row: int, column: str, value: str) -> None:
        self.row = row
        self.column = column
        self.value = value
        super().__init__(f"row {row}, column {column!r}: cannot parse {value!r} as a number")


class MissingValue(DataError):
    def __init__(self, row: int, column: str) -> None:
        self.row = row
        self.column = column
        super().__init__(f"row {row}, column {column!r}: missing value")


class ValidationFailure(DataError):
    def __init__(self, violations: list[str]) -> None:
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class SchemaMismatch(DataError):
    pass


class DivisionByZero(DataError):
    pass


class NameCollision(DataError):
    pass


class InvalidRatios(DataError):
    pass


class EmptyInput(DataError):
    pass


class LengthMismatch(DataError):
    pass


class IndexMismatch(DataError):
    pass


class ShapeMismatch(DataError):
    pass


class ColumnOrderMismatch(DataError):
    pass


class InvalidSupport(DataError):
    pass


class MissingSubsetSupport(DataError):
    pass


class SingleClassTraining(DataError):
    pass


class SingleClassTruth(DataError):
    pass


class EmptyReference(DataError):
    pass


class InvalidSpec(DataError):
    pass


class ConfigError(SynthAuditError):
    """Malformed configuration document."""


class DegenerateColumnWarning(UserWarning):
    """A metric hit a zero-variance or zero-entropy column and fell back to its defined value."""
