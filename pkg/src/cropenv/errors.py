"""Exception types shared across the package."""


class CropEnvError(Exception):
    """Base class for all package errors."""


class ConfigError(CropEnvError):
    """Invalid configuration value; message names the offending field."""


class ActionError(CropEnvError):
    """Rejected action: out of bounds or not allowed by the task."""

    def __init__(self, message: str, *, name: str | None = None,
                 low: float | None = None, high: float | None = None):
        super().__init__(message)
        self.name = name
        self.low = low
        self.high = high


class ProtocolError(CropEnvError):
    """Illegal call ordering (e.g. step before reset, step after done)."""
