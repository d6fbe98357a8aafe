from __future__ import annotations


class BimechError(Exception):
    """Base class for every error raised by this package."""


class StructuralError(BimechError, ValueError):
    """Malformed input: dimension mismatch, empty program, bad file."""


class DomainError(BimechError, ValueError):
    """Input is well-formed but outside the operation's domain."""


class CapacityError(BimechError):
    """Instance exceeds an enumeration cap."""


class InfeasibleError(BimechError):
    pass


class PrecisionError(BimechError):
    """A numerical certificate could not be reproduced at the configured precision."""

    def __init__(self, message: str, directions: list | None = None):
        super().__init__(message)
        self.directions = directions or []


class InvariantError(BimechError, AssertionError):
    """An internal guarantee was violated. Always a bug."""


class NonConvergenceError(BimechError):
    def __init__(self, message: str, log_path: str | None = None):
        super().__init__(message)
        self.log_path = log_path
