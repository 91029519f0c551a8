"""Exception types shared across the package."""


class TsubspaceError(Exception):
    """Base class for all package errors."""


class NumericInputError(TsubspaceError, ValueError):
    """Input contains NaN/Inf or violates a numeric precondition."""


class DomainError(TsubspaceError, ValueError):
    """Argument outside a special function's domain."""


class SingularMatrixError(TsubspaceError, ValueError):
    """Matrix is singular (or numerically indefinite) where positive definiteness is required."""


class ShapeError(TsubspaceError, ValueError):
    """Array dimensions are inconsistent with each other or with the model."""


class InvalidModelError(TsubspaceError, ValueError):
    """Model code is not one of the 28 supported constraint patterns."""


class ConstraintViolationError(TsubspaceError, ValueError):
    """A parameter set does not satisfy the constraints of its model code."""


class DegenerateComponentError(TsubspaceError, ValueError):
    """A component has (numerically) no mass: empty cluster or all-zero weights."""


class InfeasibleError(TsubspaceError, ValueError):
    """Requested configuration cannot be satisfied by the data (e.g. more components than rows)."""


class FitFailedError(TsubspaceError, RuntimeError):
    """Fitting did not produce a usable result after all restarts."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class GridFailedError(TsubspaceError, RuntimeError):
    """Every cell of a model/G grid failed."""


class CsvParseError(TsubspaceError, ValueError):
    """Malformed CSV input; carries 1-based line (and column, when known)."""

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class ZeroVarianceColumnError(TsubspaceError, ValueError):
    """A column cannot be standardized because its variance is zero."""


class SchemaVersionError(TsubspaceError, ValueError):
    """Serialized model file has an unsupported schema version."""


class EmptyComponentWarning(UserWarning):
    """A responsibility column has (numerically) zero total mass."""
