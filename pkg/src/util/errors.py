class DynamicsError(Exception):
    """
    Base class for every failure raised by the dynamics library.
    """


class InvalidValue(DynamicsError):
    """A NaN or otherwise unusable number reached a numeric kernel."""


class NonConvergence(DynamicsError):
    """An iterative solver hit its iteration cap."""


class DirectionUndecidable(DynamicsError):
    """The sign of the real part of a huge exponent cannot be decided from its argument."""


class QuadratureError(DynamicsError):
    """Adaptive quadrature could not reach the requested tolerance."""


class EvaluationOverflow(DynamicsError):
    """The value does not fit in an ordinary complex number; use the log-polar path instead."""


class TailNotDecaying(DynamicsError):
    """The integrand does not decay along a ray that should be an asymptotic direction."""


class Unsupported(DynamicsError):
    """The operation has no implementation for this function form."""


class ArgInvalid(DynamicsError):
    """The argument of a log-polar number is meaningless (zero or saturated)."""


class InsufficientTail(DynamicsError):
    """Not enough large orbit points to decide on exponential escape."""


class InvalidParams(DynamicsError):
    """A parameter set violates its consistency constraints."""


class WindowTooSmall(DynamicsError):
    """A square cover window lies entirely inside the discarded band."""


class InvalidSpec(DynamicsError):
    """A function spec failed validation."""


class ConfigError(DynamicsError):
    """A configuration file or override is malformed or names unknown keys."""


class OutputError(DynamicsError):
    """An output file could not be written or read back."""
