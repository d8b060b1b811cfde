"""Exception types raised across the package."""


class ArgumentError(ValueError):
    """An operation received an argument outside its domain."""


class ProtocolError(RuntimeError):
    """The online game protocol was violated (bad action, round overrun)."""


class InvariantError(AssertionError):
    """Internal bookkeeping reached a state the algorithm rules out."""


class NumericError(ArithmeticError):
    """A non-finite quantity appeared where a finite one is required."""


class UnsupportedMetricError(LookupError):
    """The trace lacks the data a metric needs (e.g. minimizers)."""


class ConfigError(ValueError):
    """An experiment configuration is malformed or names unknown ids."""
