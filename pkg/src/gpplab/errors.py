"""Exception types shared across the package."""


class GpplabError(Exception):
    """Base class for all package errors."""


class DomainError(GpplabError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ThresholdValidityError(DomainError):
    """A threshold violates the validity bound min(|M|, 1/m)."""


class UnboundedRatioError(DomainError):
    """The generator density ratio psi/g admits no finite bound."""


class NoRootError(GpplabError):
    """A root-finding problem has no solution in the admissible range."""


class ConfigError(GpplabError, ValueError):
    """An experiment configuration is invalid or inconsistent."""
