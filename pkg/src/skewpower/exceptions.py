"""Exception types raised by skewpower."""


class ParameterError(ValueError):
    """A distribution or configuration parameter is outside its domain."""


class MomentError(ParameterError):
    """The requested moment does not exist for the given parameters."""


class RegularityDomainError(ParameterError):
    """Classical asymptotics are unavailable for these parameters (ESEP with alpha <= 1)."""


class InputError(ValueError):
    """Data passed in by the caller is unusable (empty, non-finite, malformed)."""


class DegenerateDataError(InputError):
    """Data has no spread, so a scale estimate would collapse to zero."""


class IntegrationError(RuntimeError):
    """Numerical quadrature did not reach the requested accuracy."""


class ConditioningError(ArithmeticError):
    """A matrix that must be inverted is singular or badly conditioned."""
