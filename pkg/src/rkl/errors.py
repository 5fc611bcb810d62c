"""Exception types shared across the package."""


class RklError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(RklError, ValueError):
    """An argument lies outside the supported domain of an evaluator."""


class ConvergenceFailure(RklError, RuntimeError):
    """An iterative or adaptive scheme did not reach the requested accuracy."""

    def __init__(self, message: str, *, estimate: float | None = None,
                 error: float | None = None):
        super().__init__(message)
        #: best value computed before giving up (may be None)
        self.estimate = estimate
        #: estimated error of that value (may be None)
        self.error = error


class OscillatoryQuadratureError(ConvergenceFailure):
    """A quadrature failed because cancellation exhausted the float64 budget.

    Raised when the integrand's positive and negative parts (or its
    oscillation envelope) exceed the achievable relative accuracy, so no
    amount of refinement can help at this precision.
    """
