"""Module for custom exceptions."""

from typing import Any


class FatigueAutoMLError(Exception):
    """Base class for exceptions in this module."""

    pass


class CellError(FatigueAutoMLError):
    """Base class for errors located at a single table cell."""

    def __init__(self, row: int, column: str, value: Any, message: str = "") -> None:
        """Store the cell coordinates."""
        self.row = row
        self.column = column
        self.value = value
        super().__init__(message or f"Row {row}, column {column!r}: {value!r}")

    def __reduce__(self) -> tuple:  # noqa: D105
        return (type(self), (self.row, self.column, self.value, str(self)))


class MissingColumn(FatigueAutoMLError):
    """Raised when a required schema column is absent from the CSV header."""

    def __init__(self, name: str) -> None:
        """Store the missing column name."""
        self.name = name
        super().__init__(name)

    def __reduce__(self) -> tuple:  # noqa: D105
        return (type(self), (self.name,))


class ParseError(CellError):
    """Raised when a real cell is not a decimal number."""

    pass


class RangeViolation(CellError):
    """A cell outside its column's range or level set. Collected, not raised."""

    pass


class EmptyColumn(FatigueAutoMLError):
    """A fully missing column in an EDA summary. Collected, not raised."""

    pass


class AllMissingColumn(FatigueAutoMLError):
    """Raised when a column to impute has no observed training values."""

    pass


class SchemaMismatch(FatigueAutoMLError):
    """Raised when a dataset does not conform to a fitted pipeline or schema."""

    pass


class DegenerateInput(FatigueAutoMLError):
    """Raised when a power-transform parameter is fitted on constant or too-short data."""

    pass


class NonPositiveTarget(FatigueAutoMLError):
    """Raised when a target value cannot be passed through the decadic logarithm."""

    pass


class ConstantColumn(FatigueAutoMLError):
    """A constant column excluded from a correlation matrix. Collected, not raised."""

    pass


class SingularDesign(FatigueAutoMLError):
    """An auxiliary VIF regression with a perfect fit. Reported as an infinite VIF."""

    pass


class SingularSystem(FatigueAutoMLError, UserWarning):
    """Warned when a least-squares design is rank-deficient."""

    pass


class WidthMismatch(FatigueAutoMLError):
    """Raised when a prediction matrix width differs from the training width."""

    pass


class NotIterative(FatigueAutoMLError):
    """Raised when a learning curve is requested for a non-iterative family."""

    pass


class NonFiniteLoss(FatigueAutoMLError):
    """Raised when a network's training loss diverges."""

    pass


class InvalidHyperparameter(FatigueAutoMLError):
    """Raised when a hyperparameter name or value is outside its family's space."""

    pass


class TooFewRows(FatigueAutoMLError):
    """Raised when there are fewer rows than the cross-validation needs."""

    pass


class LengthMismatch(FatigueAutoMLError):
    """Raised when actual and predicted vectors differ in length."""

    pass


class EmptyBand(FatigueAutoMLError):
    """Raised when no actual value falls inside an evaluation band."""

    pass


class NotLinear(FatigueAutoMLError):
    """Raised when coefficients are requested from a non-linear model."""

    pass


class StageError(FatigueAutoMLError):
    """Raised when a run stage fails. Carries the stage label."""

    def __init__(self, stage: str, message: str) -> None:
        """Store the stage label."""
        self.stage = stage
        self.message = message
        super().__init__(f"Stage {stage!r} failed: {message}")

    def __reduce__(self) -> tuple:  # noqa: D105
        return (type(self), (self.stage, self.message))


class OutputDirNotEmpty(FatigueAutoMLError):
    """Raised when a run directory already holds files."""

    pass


class ConfigError(FatigueAutoMLError):
    """Raised when a config file has an unknown section or a bad value."""

    pass
