"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A model or run configuration cannot be built as requested."""


class NumericError(ArithmeticError):
    """A computation produced non-finite values."""
