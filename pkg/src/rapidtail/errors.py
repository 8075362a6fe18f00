"""Exception hierarchy.

Every error raised by this package derives from :class:`RapidTailError` so
callers can catch the library in one clause.  Validation errors double as
``ValueError`` and numeric breakdowns carry enough state (bracket, partial
estimate) to diagnose the failing computation.
"""


class RapidTailError(Exception):
    """Base class for all rapidtail errors."""


class DomainError(RapidTailError, ValueError):
    """An argument lies outside the operation's documented domain."""


class ShapeError(RapidTailError, ValueError):
    """Vector/matrix dimensions do not agree."""


class InvalidDimensionError(RapidTailError, ValueError):
    """A dimension parameter is not a positive integer."""


class InvalidMatrixError(RapidTailError, ValueError):
    """A matrix fails symmetry or nonnegative-definiteness checks."""


class InvalidDispersionError(RapidTailError, ValueError):
    """The dispersion matrix is not symmetric positive-definite (or is not
    unit-diagonal, which the marginal formulas assume)."""


class InvalidSkewnessError(RapidTailError, ValueError):
    """The skewness vector violates its admissibility constraints."""


class InvalidSpecError(RapidTailError, ValueError):
    """A derived object (e.g. the augmented dispersion matrix) is inconsistent."""


class NotTailEquivalentError(RapidTailError, ValueError):
    """The marginal densities are not right-tail equivalent, so tail-scaling
    constructions are undefined for this configuration."""


class QuantileRangeError(RapidTailError, ValueError):
    """The quantile solver failed to bracket the root inside [-60, 60]."""


class NumericFailureError(RapidTailError, ArithmeticError):
    """A quadrature or root-finding routine did not converge.

    Attributes
    ----------
    bracket : tuple or None
        The last interval under refinement when the failure occurred.
    """

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class NonIntegrableOrthantError(RapidTailError, ValueError):
    """Some exponential rate component is nonpositive, so the upper-orthant
    integral of the tail density diverges.

    Attributes
    ----------
    components : tuple of int
        Indices of the offending rate components.
    """

    def __init__(self, message, components=()):
        super().__init__(message)
        self.components = tuple(components)


class InconclusiveEstimateError(RapidTailError, ArithmeticError):
    """An importance-sampling estimate did not reach the requested relative
    standard error within the sample budget.

    Attributes
    ----------
    log_estimate : float
        The partial log-probability estimate.
    rel_std_error : float
        The achieved relative standard error.
    """

    def __init__(self, message, log_estimate=None, rel_std_error=None):
        super().__init__(message)
        self.log_estimate = log_estimate
        self.rel_std_error = rel_std_error
