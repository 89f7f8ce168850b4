"""Exception types raised across the package."""


class ParameterError(ValueError):
    """Invalid distribution or modulation parameters."""


class NotPositiveDefiniteError(ParameterError):
    """A scale matrix failed its Cholesky factorization."""


class DomainError(ValueError):
    """A function was evaluated outside the region where it is defined."""


class UnsupportedCaseError(ValueError):
    """The requested computation does not apply to this parameter configuration."""


class QuadratureError(RuntimeError):
    """Numerical integration did not reach the requested tolerance."""
