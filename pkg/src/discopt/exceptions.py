"""Exception types shared across the package."""


class DiscoptError(Exception):
    """Base class for all package errors."""


class DomainError(DiscoptError, ValueError):
    """An argument lies outside the domain of an operation."""


class InfeasibleError(DiscoptError):
    """No feasible structure exists for the requested problem."""


class ParseError(DiscoptError, ValueError):
    """A serialized instance or allocation is malformed."""


class SolutionError(DiscoptError, ValueError):
    """An allocation refers to unknown elements or agents."""


class OracleRefusal(DiscoptError):
    """The exact oracle declines an instance above its size cap."""
