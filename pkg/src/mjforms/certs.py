"""Truncation certificates shared by all series evaluators."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class TruncationCertificate:
    """Empirical tail bound attached to a truncated evaluation.

    ``bound`` dominates the modulus of the dropped tail under the geometric
    decay observed (shell-by-shell) during summation; ``radius`` and
    ``terms`` record how far the sum went.
    """

    bound: float
    radius: float
    terms: int
    note: str = ""

    def __post_init__(self):
        if self.bound < 0:
            raise ValueError("certificate bound must be nonnegative")
