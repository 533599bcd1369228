"""Exception types shared across the toolkit."""


class DomainError(ValueError):
    """A parameter lies outside the mathematical domain of an operation."""


class CapacityError(RuntimeError):
    """An operation would exceed its configured size/memory cap."""


class InsufficientSamplesError(ValueError):
    """A statistical summary was requested from too few (uncensored) samples."""
