"""Exception types shared across the package."""


class IsogasError(Exception):
    """Base class for all package errors."""


class DomainError(IsogasError):
    """Inputs outside the mathematical domain of an operation."""


class PrecisionError(IsogasError):
    """A series or quadrature failed to reach the requested tolerance."""

    def __init__(self, message, last_term=None):
        super().__init__(message)
        self.last_term = last_term


class StabilityError(IsogasError):
    """A time integration violated a discrete a-priori bound."""


class PreconditionError(IsogasError):
    """A documented precondition of an operation was not met."""


class ConfigError(IsogasError):
    """Malformed or invalid run configuration."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
