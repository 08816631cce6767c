"""Exception types shared across the package."""


class HystflowError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(HystflowError):
    """Raised for malformed or inconsistent run configuration."""


class NumericalError(HystflowError):
    """Raised when an iteration, bracket search, or integration fails."""


class DomainError(HystflowError):
    """Raised when an argument lies outside the physically meaningful range."""
