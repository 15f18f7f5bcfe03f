"""Exception types shared across the package.

Everything that signals bad caller input derives from ValueError so that
callers who do not care about the fine-grained type can catch one thing.
"""


class InvalidParameterError(ValueError):
    """A numeric argument is outside its documented domain."""


class InvalidOrderError(ValueError):
    """A constellation order is unsupported for the requested operation."""


class DegenerateConstellationError(ValueError):
    """The constellation carries no energy or contains non-finite points."""


class ParseError(ValueError):
    """Complex-array text could not be parsed.

    Attributes:
        offset: character offset into the input at which parsing failed.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class EmptyBatchError(ValueError):
    """A sample batch was requested or supplied with no elements."""


class ConfigError(ValueError):
    """An experiment configuration is malformed or incomplete."""


class TemplateFieldError(ValueError):
    """A prompt template field is missing or empty.

    Attributes:
        field: name of the offending field.
    """

    def __init__(self, field: str, message: str | None = None):
        super().__init__(message or f"missing or empty template field: {field}")
        self.field = field


class TransportError(RuntimeError):
    """A remote agent endpoint could not be reached or answered garbage."""
