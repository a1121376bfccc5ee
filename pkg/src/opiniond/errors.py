"""Exception types raised by the simulator."""


class OpiniondError(Exception):
    """Base class for all simulator errors."""


class InvalidParameterError(OpiniondError, ValueError):
    """A model, sampler or analysis parameter is outside its legal range."""


class PreconditionError(OpiniondError, ValueError):
    """An operation was called on a state that violates its precondition."""


class ConfigError(OpiniondError, ValueError):
    """A run configuration could not be parsed or failed validation."""
