"""Exception types shared across the package."""


class ConfigurationError(Exception):
    """Raised when a system description or run configuration is unusable."""


class CloudSizeError(ConfigurationError):
    """Raised when a point-cloud build would exceed the configured cap."""

    def __init__(self, projected: int, cap: int):
        super().__init__(
            f"projected cloud size {projected} exceeds the configured cap of {cap} points"
        )
        self.projected = projected
        self.cap = cap


class DomainError(ValueError):
    """Raised when a formula or operation is evaluated outside its domain."""
