"""Exception types shared by all modules."""


class ChainError(Exception):
    """Base class for harmchain errors."""


class DomainError(ChainError, ValueError):
    """An argument lies outside the domain of the operation."""


class StabilityError(ChainError, ArithmeticError):
    """A time step violates the integrator's stability bound, or a gap collapsed."""
