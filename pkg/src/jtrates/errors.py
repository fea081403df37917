"""Exception hierarchy shared by all jtrates modules."""


class JtratesError(Exception):
    """Base class for library errors."""


class InvalidArgumentError(JtratesError, ValueError):
    """An argument is outside the domain of the operation."""


class InvalidStateError(JtratesError, RuntimeError):
    """An operation was applied to an object in the wrong state (e.g. measure tag)."""


class UnsupportedModelError(JtratesError, NotImplementedError):
    """No closed form exists for the requested model configuration."""


class ConfigError(JtratesError, ValueError):
    """Invalid solver or run configuration."""

    def __init__(self, message, *, line=None, field=None):
        self.line = line
        self.field = field
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class MgfOverflowError(JtratesError, OverflowError):
    """The moment generating function exceeds the float64 range."""


class DegenerateParametersWarning(UserWarning):
    """Parameters fall outside the standing non-degeneracy assumptions."""
