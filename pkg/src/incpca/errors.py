"""Exception hierarchy.

Everything derives from :class:`IncPCAError` (itself a ``ValueError``) so that
callers, including the CLI, can separate data problems from programming
errors with a single ``except``.
"""


class IncPCAError(ValueError):
    """Base class for all data/numerical errors raised by the package."""


class DimensionError(IncPCAError):
    """An input has the wrong length or shape."""


class NonFiniteError(IncPCAError):
    """An input contains NaN or infinity."""


class InsufficientDataError(IncPCAError):
    """Fewer samples than an operation needs (e.g. variance with n < 2)."""


class DegenerateVariableError(IncPCAError):
    """A variable has zero variance while scaling is enabled."""

    def __init__(self, message, columns=()):
        super().__init__(message)
        self.columns = tuple(columns)


class NumericalError(IncPCAError):
    """Round-off beyond the documented tolerance, or upstream corruption."""


class NotSymmetricError(IncPCAError):
    """Matrix handed to the eigensolver is not symmetric within tolerance."""


class ConvergenceError(IncPCAError):
    """Jacobi iteration hit its sweep cap without converging."""


class StepMismatchError(IncPCAError):
    """Covariance state and moment statistics refer to different counts."""


class DataError(IncPCAError):
    """Malformed input file; carries 1-based data-row and column coordinates."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column
