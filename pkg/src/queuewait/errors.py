"""Exception hierarchy shared by every queuewait module."""


class QueueWaitError(Exception):
    """Base class for all library errors."""


class DomainError(QueueWaitError, ValueError):
    """Input outside the mathematical domain (no equilibrium, bad argument)."""


class PrecisionError(QueueWaitError, ArithmeticError):
    """A truncation or floating-point guard detected an unreliable result."""


class QuadratureError(QueueWaitError, ArithmeticError):
    """Numerical integration failed to meet its error target."""


class ConfigError(QueueWaitError, ValueError):
    """Invalid simulation configuration."""


class ShapeError(QueueWaitError, ValueError):
    """Histogram and analytic bin layouts do not match."""
