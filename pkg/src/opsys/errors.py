"""Shared exception types."""

from __future__ import annotations


class SearchBudgetError(RuntimeError):
    """A randomized search exhausted its retry budget.

    Carries the search trace so callers can report why nothing was found.
    """

    def __init__(self, message: str, trace: tuple[str, ...] = ()):
        super().__init__(message)
        self.trace = tuple(trace)
