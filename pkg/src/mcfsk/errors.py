"""Exception hierarchy shared by all modules."""


class MCFError(Exception):
    """Base class for all errors raised by mcfsk."""


class InputError(MCFError, ValueError):
    """Malformed input: unsorted grids, duplicate points, length mismatch."""


class DomainError(InputError):
    """A point lies outside the open interval on which a covariance is defined."""


class ParameterError(InputError):
    """A hyperparameter is outside its admissible range."""


class NumericalError(MCFError, ArithmeticError):
    """Base class for numerical failures (exit code 3 in the CLI)."""


class NearSingularError(NumericalError):
    """A closed-form denominator is too close to zero.

    Attributes
    ----------
    index : int or None
        1-based index of the offending design point, when known.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class NotPositiveDefiniteError(NumericalError):
    """A matrix expected to be SPD failed a pivot or eigenvalue check."""


class SolverError(NumericalError):
    """An iterative solver did not converge.

    Attributes
    ----------
    residual : float
        Relative residual at the last iterate.
    """

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


class FitError(NumericalError):
    """Every optimizer start failed."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConsistencyError(NumericalError):
    """An internal self-check (e.g. an eigenpair residual) failed."""
