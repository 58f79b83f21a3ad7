"""Exceptions shared across modules."""


class GuardTripError(RuntimeError):
    """A numerical guard was violated badly enough to invalidate the run."""
