"""Exception types raised across the package."""


class DynomdError(Exception):
    """Base class for all package errors."""


class DomainError(DynomdError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class DimensionError(DynomdError, ValueError):
    """Vector or matrix dimensions do not agree."""


class ConfigError(DynomdError, ValueError):
    """Invalid experiment configuration or inconsistent run setup."""


class PredictorExhausted(DynomdError, LookupError):
    """An external prediction stream ran out before the horizon ended."""


class ConvergenceError(DynomdError, RuntimeError):
    """An iterative solver hit its iteration cap without certifying its answer.

    The last duality gap reached is available as ``gap``.
    """

    def __init__(self, message, gap):
        super().__init__(message)
        self.gap = gap
