"""Measured quantities carrying a one-sigma standard error."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class ValueWithError:
    """A scalar with its one-sigma standard error.

    Errors combine in quadrature under the usual first-order (independent
    inputs) propagation rules; helper constructors below cover the few
    arithmetic patterns the analysis pipeline needs.
    """

    value: float
    stderr: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"non-finite value: {self.value}")
        if not (math.isfinite(self.stderr) and self.stderr >= 0.0):
            raise ValueError(f"standard error must be finite and >= 0, got {self.stderr}")

    def significance(self) -> float:
        """Distance from zero in units of the standard error."""
        if self.stderr <= 0.0:
            raise ValueError("significance undefined for zero standard error")
        return self.value / self.stderr

    def __format__(self, spec: str) -> str:
        return f"{self.value:{spec}} +/- {self.stderr:{spec}}"


def from_counts(n: float, norm: float = 1.0) -> ValueWithError:
    """Poisson count ``n`` divided by an exact normalisation."""
    if norm <= 0:
        raise ValueError("normalisation must be positive")
    return ValueWithError(n / norm, math.sqrt(max(n, 0.0)) / norm)


def vsum(*terms: ValueWithError) -> ValueWithError:
    value = sum(t.value for t in terms)
    err = math.sqrt(sum(t.stderr**2 for t in terms))
    return ValueWithError(value, err)


def vdiff(a: ValueWithError, b: ValueWithError) -> ValueWithError:
    return ValueWithError(a.value - b.value, math.hypot(a.stderr, b.stderr))


def vprod(a: ValueWithError, b: ValueWithError) -> ValueWithError:
    value = a.value * b.value
    err = math.hypot(b.value * a.stderr, a.value * b.stderr)
    return ValueWithError(value, err)


def vquot(a: ValueWithError, b: ValueWithError) -> ValueWithError:
    if b.value == 0:
        raise ZeroDivisionError("division by zero-valued quantity")
    value = a.value / b.value
    err = abs(value) * math.hypot(
        a.stderr / a.value if a.value != 0 else 0.0, b.stderr / b.value
    )
    # |value| = 0 with nonzero input error still has first-order error a.stderr/|b|
    if a.value == 0:
        err = a.stderr / abs(b.value)
    return ValueWithError(value, err)


def vscale(a: ValueWithError, k: float) -> ValueWithError:
    return ValueWithError(a.value * k, abs(k) * a.stderr)
