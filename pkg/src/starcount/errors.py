"""Exception types shared by every module.

The CLI maps DomainError to exit code 1 and CapabilityError to exit code 2.
"""


class StarcountError(Exception):
    """Base class."""


class DomainError(StarcountError, ValueError):
    """Input outside the mathematical domain of an operation."""


class SingularTermError(DomainError):
    """A summand has a vanishing denominator (distance below 1e-15)."""

    def __init__(self, q, distance):
        self.q = tuple(int(v) for v in q)
        self.distance = float(distance)
        super().__init__(f"singular term at q={self.q} (distance {self.distance:.3e})")


class CapabilityError(StarcountError, RuntimeError):
    """Request exceeds a hard capability limit (dimension, budget)."""


class InternalError(StarcountError, RuntimeError):
    """A post-condition that should be impossible failed."""
