"""Exception types shared by all modules."""


class GrushinError(Exception):
    """Base class for library errors."""


class InvalidArgument(GrushinError, ValueError):
    """An argument violates a documented precondition."""


class AccuracyNotMet(GrushinError, ArithmeticError):
    """A quadrature could not certify the requested relative tolerance."""


class DegenerateEstimate(GrushinError, ArithmeticError):
    """A Monte-Carlo estimator produced no usable samples."""


class DiagonalSingularity(GrushinError, ValueError):
    """A singular kernel was requested on the diagonal x = y."""


class DivergentIntegral(GrushinError, ArithmeticError):
    """The time integral defining a kernel does not converge."""
