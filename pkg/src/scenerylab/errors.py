"""Exception hierarchy shared by every module."""


class SceneryLabError(Exception):
    """Base class for all errors raised by scenerylab."""


class DomainError(SceneryLabError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class GroupMismatchError(DomainError):
    """Operands belong to different groups (or cyclotomic contexts)."""


class FallbackRequiredError(DomainError):
    """Exact arithmetic is unavailable for this group; use the numeric path."""

    def __init__(self, message, factor=None):
        super().__init__(message)
        self.factor = factor


class CapacityError(SceneryLabError):
    """A configured size cap would be exceeded."""


class SingularSystemError(SceneryLabError):
    """A linear system has no unique solution (colliding Fourier coefficients)."""

    def __init__(self, message, collisions=()):
        super().__init__(message)
        self.collisions = list(collisions)


class InvalidInputError(SceneryLabError, ValueError):
    """Input data is not consistent with any valid object."""


class InconsistencyError(SceneryLabError):
    """Internal consistency check failed. This indicates a bug, never bad input."""
