"""Exception types and the cooperative deadline used by long computations."""
from __future__ import annotations

import time


class LineageError(ValueError):
    """Malformed lineage input (unknown variable, bad name, empty clause...)."""


class ContractViolation(AssertionError):
    """An operation was called outside its precondition."""


class AttributionTimeout(TimeoutError):
    pass


class Deadline:
    """Checked between node visits and Shannon expansions."""

    __slots__ = ("expires",)

    def __init__(self, seconds: float | None):
        self.expires = None if seconds is None else time.monotonic() + seconds

    def check(self) -> None:
        if self.expires is not None and time.monotonic() > self.expires:
            raise AttributionTimeout("deadline exceeded")


NO_DEADLINE = Deadline(None)
