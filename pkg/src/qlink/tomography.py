"""Density-matrix assembly and entanglement metrics.

The heralded state of the two memory output modes is described by five real
numbers: the photon-number populations p00, p10, p01, p11 and one coherence
d between the single-photon terms.  This module turns measured populations
and interference visibilities into that element set and evaluates the
derived quantities: two-photon suppression, concurrence (optionally
back-propagated through the detection chain), and the effective fidelity in
the post-selected single/two-photon subspace.

Error bars propagate to first order assuming independent Poisson-counted
inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Literal

from .values import ValueWithError, vprod, vquot, vscale, vsum

HeraldLabel = Literal["i1", "i2", "combined"]

TRACE_TOL = 1e-9


class PhysicalityError(ValueError):
    """Inputs incompatible with a physical element set."""


@dataclass(frozen=True)
class DensityMatrixElements:
    """The five independent real elements of the heralded state.

    ``d`` keeps the sign implied by the heralding detector (positive for
    the first detector, negative for the second); metrics that must not
    depend on the heralded phase use its magnitude.  ``coherence_flagged``
    marks element sets whose coherence exceeds the populations' physical
    bound by less than the 3-sigma acceptance slack.
    """

    p00: ValueWithError
    p10: ValueWithError
    p01: ValueWithError
    p11: ValueWithError
    d: ValueWithError
    herald_label: HeraldLabel = "combined"
    coherence_flagged: bool = False

    def __post_init__(self):
        for name in ("p00", "p10", "p01", "p11"):
            if getattr(self, name).value < 0:
                raise PhysicalityError(f"{name} must be >= 0")
        trace = self.p00.value + self.p10.value + self.p01.value + self.p11.value
        if abs(trace - 1.0) > TRACE_TOL:
            raise PhysicalityError(f"trace deviates from 1 by {trace - 1.0:g}")

    def trace(self) -> float:
        return self.p00.value + self.p10.value + self.p01.value + self.p11.value


@dataclass(frozen=True)
class EfficiencyChain:
    """Detection chain used to refer the state back inside the crystals."""

    eta_det: float
    eta_setup: float
    eta_read_A: float
    eta_read_B: float

    def __post_init__(self):
        for name in ("eta_det", "eta_setup", "eta_read_A", "eta_read_B"):
            v = getattr(self, name)
            if not (0.0 < v <= 1.0):
                raise ValueError(f"{name} must lie in (0, 1], got {v}")

    @property
    def eta_A(self) -> float:
        return self.eta_det * self.eta_setup * self.eta_read_A

    @property
    def eta_B(self) -> float:
        return self.eta_det * self.eta_setup * self.eta_read_B


def assemble(
    p10: ValueWithError,
    p01: ValueWithError,
    p11: ValueWithError,
    d: ValueWithError,
    herald_label: HeraldLabel = "combined",
) -> DensityMatrixElements:
    """Build the element set, computing p00 as the trace complement.

    The coherence is checked against the physical bound
    |d| <= sqrt(p10 p01): violations beyond 3 sigma are rejected, smaller
    overshoots (possible with finite statistics) are accepted and flagged.
    """
    for name, p in (("p10", p10), ("p01", p01), ("p11", p11)):
        if p.value < 0:
            raise PhysicalityError(f"{name} must be >= 0, got {p.value}")
    total = p10.value + p01.value + p11.value
    if total > 1.0:
        raise PhysicalityError(f"populations sum to {total} > 1")
    p00 = ValueWithError(
        1.0 - total, math.sqrt(p10.stderr**2 + p01.stderr**2 + p11.stderr**2)
    )
    bound = math.sqrt(p10.value * p01.value)
    excess = abs(d.value) - bound
    flagged = False
    if excess > 0:
        # first-order error of |d| - sqrt(p10 p01)
        if bound > 0:
            db = 0.5 * math.hypot(
                p01.value / bound * p10.stderr, p10.value / bound * p01.stderr
            )
        else:
            db = 0.0
        sigma = math.hypot(d.stderr, db)
        if sigma == 0.0 or excess > 3.0 * sigma:
            raise PhysicalityError(
                f"|d|={abs(d.value):g} exceeds sqrt(p10*p01)={bound:g} "
                f"by more than 3 sigma"
            )
        flagged = True
    return DensityMatrixElements(p00, p10, p01, p11, d, herald_label, flagged)


@dataclass(frozen=True)
class ConcurrenceResult:
    """Clamped concurrence plus the unclamped signed value for significance."""

    concurrence: ValueWithError
    unclamped: ValueWithError

    def significance(self) -> float:
        return self.unclamped.significance()


def concurrence(rho: DensityMatrixElements) -> ConcurrenceResult:
    """Entanglement monotone max(0, 2|d| - 2 sqrt(p00 p11)).

    Uses the coherence magnitude so both heralded states score alike; the
    unclamped value is retained for standard-deviation significance tests.
    """
    p00, p11, d = rho.p00, rho.p11, rho.d
    cross = math.sqrt(p00.value * p11.value)
    raw = 2.0 * abs(d.value) - 2.0 * cross
    # d(C)/d(p00) = -sqrt(p11/p00), d(C)/d(p11) = -sqrt(p00/p11)
    terms = [(2.0 * d.stderr) ** 2]
    if cross > 0:
        terms.append((math.sqrt(p11.value / p00.value) * p00.stderr) ** 2)
        terms.append((math.sqrt(p00.value / p11.value) * p11.stderr) ** 2)
    err = math.sqrt(sum(terms))
    unclamped = ValueWithError(raw, err)
    return ConcurrenceResult(ValueWithError(max(0.0, raw), err), unclamped)


def two_photon_suppression(rho: DensityMatrixElements) -> ValueWithError:
    """Heralded two-photon suppression p11 / (p10 p01); below one indicates
    single-excitation operation."""
    if rho.p10.value * rho.p01.value <= 0:
        raise ValueError("two-photon suppression undefined for zero p10*p01")
    return vquot(rho.p11, vprod(rho.p10, rho.p01))


def offdiag_from_visibility(
    visibility: ValueWithError,
    p10: ValueWithError,
    p01: ValueWithError,
    sign: int = +1,
) -> ValueWithError:
    """Coherence d = sign * V (p10 + p01) / 2 from the fringe visibility."""
    if not (0.0 <= visibility.value <= 1.0):
        raise ValueError(f"visibility must lie in [0, 1], got {visibility.value}")
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    return vscale(vprod(visibility, vsum(p10, p01)), 0.5 * sign)


def p11_estimate(
    p_coinc_10: ValueWithError,
    p_acc_10: ValueWithError,
    p_coinc_01: ValueWithError,
    p_acc_01: ValueWithError,
) -> ValueWithError:
    """Two-photon population from the true/accidental split of each arm.

    Triple coincidences pair a true detection on one arm with an accidental
    on the other, or two accidentals:
    p11 = p_coinc_10 p_acc_01 + p_acc_10 p_coinc_01 + p_acc_10 p_acc_01.
    """
    for name, p in (("p_coinc_10", p_coinc_10), ("p_acc_10", p_acc_10),
                    ("p_coinc_01", p_coinc_01), ("p_acc_01", p_acc_01)):
        if p.value < 0:
            raise ValueError(f"{name} must be >= 0, got {p.value}")
    # propagate with correlations ignored between coinc and acc of one arm;
    # both derive from disjoint count sets so independence holds
    return vsum(
        vprod(p_coinc_10, p_acc_01),
        vprod(p_acc_10, p_coinc_01),
        vprod(p_acc_10, p_acc_01),
    )


def p11_from_g2(p10: float, g2_si: float) -> float:
    """Symmetric-arm closed form 4 (p10/g2)^2 (g2 - 1).

    Equivalent to :func:`p11_estimate` with both arms at p10 and the split
    p_acc = 2 p10 / g2_si, p_coinc = p10 - p_acc.
    """
    if g2_si <= 1:
        raise ValueError(f"g2_si must exceed 1, got {g2_si}")
    if p10 < 0:
        raise ValueError(f"p10 must be >= 0, got {p10}")
    return 4.0 * (p10 / g2_si) ** 2 * (g2_si - 1.0)


def effective_fidelity(rho: DensityMatrixElements) -> ValueWithError:
    """Overlap with the heralded Bell state inside the one/two-photon subspace.

    (p10/2 + p01/2 + |d|) / (p10 + p01 + p11); the vacuum term drops out,
    matching operation with post-selection on a signal detection.
    """
    p10, p01, p11, d = rho.p10, rho.p01, rho.p11, rho.d
    denom = p10.value + p01.value + p11.value
    if denom <= 0:
        raise ValueError("effective fidelity undefined for an empty subspace")
    num = 0.5 * p10.value + 0.5 * p01.value + abs(d.value)
    f = num / denom
    # partials: dF/dp10 = (0.5 - F)/denom, same for p01; dF/dp11 = -F/denom;
    # dF/d|d| = 1/denom
    err = math.sqrt(
        (((0.5 - f) / denom) * p10.stderr) ** 2
        + (((0.5 - f) / denom) * p01.stderr) ** 2
        + ((f / denom) * p11.stderr) ** 2
        + ((1.0 / denom) * d.stderr) ** 2
    )
    return ValueWithError(f, err)


def backpropagate(
    rho: DensityMatrixElements, chain: EfficiencyChain
) -> DensityMatrixElements:
    """Refer the element set back to the state inside the crystals.

    Divides p10, p01 by the per-node detection chains, p11 by their product
    and d by its geometric mean, then recomputes p00 as the complement.  The
    concurrence of the result is the back-propagated witness.
    """
    eta_A, eta_B = chain.eta_A, chain.eta_B
    p10 = vscale(rho.p10, 1.0 / eta_A)
    p01 = vscale(rho.p01, 1.0 / eta_B)
    p11 = vscale(rho.p11, 1.0 / (eta_A * eta_B))
    d = vscale(rho.d, 1.0 / math.sqrt(eta_A * eta_B))
    total = p10.value + p01.value + p11.value
    if total > 1.0:
        raise PhysicalityError(
            f"back-propagated populations sum to {total} > 1; chain too lossy"
        )
    p00 = ValueWithError(
        1.0 - total, math.sqrt(p10.stderr**2 + p01.stderr**2 + p11.stderr**2)
    )
    return replace(rho, p00=p00, p10=p10, p01=p01, p11=p11, d=d)


def significance(value: float, sigma: float) -> float:
    """Number of standard deviations separating ``value`` from zero."""
    if sigma <= 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    return value / sigma
