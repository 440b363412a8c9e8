"""Exception types shared across the package."""


class PrivProfError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(PrivProfError):
    """Dataset or taxonomy file does not match the expected schema."""


class DataValueError(PrivProfError):
    """A cell holds a value that is invalid for its column."""

    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        super().__init__(message)
        self.row = row
        self.column = column


class DuplicateUserError(PrivProfError):
    """Two rows share the same user_id."""


class ParameterError(PrivProfError, ValueError):
    """An argument is outside its documented domain."""


class UnknownSubsetError(PrivProfError, KeyError):
    """A subset or suite name is not defined."""


class TrainingDataError(PrivProfError):
    """Training data violates a precondition (e.g. a class is absent)."""


class DivergenceError(PrivProfError):
    """Training loss became non-finite."""

    def __init__(self, epoch: int):
        super().__init__(f"training diverged (non-finite loss) at epoch {epoch}")
        self.epoch = epoch


class InstanceTooLargeError(PrivProfError):
    """Exhaustive enumeration would exceed the safety guard."""


class UndefinedMetricError(PrivProfError):
    """A metric is undefined for the given inputs (e.g. single-class ROC)."""
