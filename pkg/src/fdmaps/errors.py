"""Exception types shared across modules."""


class FdmapsError(Exception):
    """Base class for all package errors."""


class ConfigurationError(FdmapsError):
    """Invalid parameters, unknown tags, malformed configs."""


class DomainError(FdmapsError):
    """Input outside the mathematical domain of an operation."""


class InitializationError(FdmapsError):
    """Infeasible starting point for a minimization."""


class InternalError(FdmapsError):
    """Invariant violation that should be unreachable for module-built data."""
