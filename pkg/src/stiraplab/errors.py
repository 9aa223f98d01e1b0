"""Shared exception types with distinct CLI exit codes."""


class ConfigError(ValueError):
    """Invalid or unknown configuration input (CLI exit code 2)."""


class NumericsError(RuntimeError):
    """Numeric failure: solver breakdown, blow-up, positivity loss (exit code 3)."""


class TruncationError(NumericsError):
    """Charge-basis truncation too small for the requested accuracy."""
