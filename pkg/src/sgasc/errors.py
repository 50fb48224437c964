"""Exception types shared across the package."""


class SgascError(Exception):
    """Base class for all package errors."""


class DomainError(SgascError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConstraintError(SgascError, ValueError):
    """A parameter set violates a model constraint (positivity, stationarity, ...)."""


class ConvergenceError(SgascError, RuntimeError):
    """An optimiser failed to converge. Carries the best iterate found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class FilterDivergenceError(SgascError, RuntimeError):
    """A recursive filter produced a non-finite value. Carries the first bad index."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class RootBracketError(SgascError, RuntimeError):
    """A bracketed root search found no sign change."""


class NumericError(SgascError, RuntimeError):
    """A numerical evaluation failed (non-convergent quadrature, bad Fisher grid, ...)."""


class UndefinedRatioError(SgascError, ZeroDivisionError):
    """A percentage-change measure has a benchmark too close to zero."""


class NotAvailable(SgascError, NotImplementedError):
    """A closed form is not available for the requested family."""


class InternalError(SgascError, RuntimeError):
    """An internal consistency check failed (e.g. decreasing EM log-likelihood)."""
