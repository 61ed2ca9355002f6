"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Operands have incompatible lengths or shapes."""


class ParameterError(ValueError):
    """A parameter is outside its documented domain."""


class UnsupportedRuleError(ValueError):
    """The requested automaton rule does not support this operation."""


class StateError(RuntimeError):
    """An object is not in the required state (e.g. model not fitted)."""


class FormatError(ValueError):
    """A binary file does not match its documented format."""


class ConsistencyError(ValueError):
    """Two inputs that must agree (e.g. image/label counts) do not."""


class MemoryBudgetError(RuntimeError):
    """A run was refused because its working set exceeds the configured cap."""


class ConfigError(ValueError):
    """A CLI/JSON configuration field is unknown or has the wrong type."""
