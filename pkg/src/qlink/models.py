"""Closed-form physics models for the link components.

Three parameter bundles (memory, pair source, optical channel) and the
analytic relations between them: spin-wave storage efficiency versus recall
delay, pump-power scaling of the source cross-correlation, the post-storage
signal-idler cross-correlation, the single-photon interference visibility
budget, and the minimum cross-correlation compatible with an entangled
state.  Everything here is a pure function over frozen value types, so the
calculators are safe to call from anywhere, including inside the Monte
Carlo engine where they provide calibration targets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

LN2 = math.log(2.0)


def _check_unit_interval(name: str, x: float) -> None:
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {x}")


@dataclass(frozen=True)
class MemoryModel:
    """Spin-wave memory parameters for one node.

    Attributes:
        eta0: zero-delay spin-wave storage efficiency.
        gamma_inh: inhomogeneous linewidth of the spin transition (Hz).
        eta_write: spin-wave write efficiency.
        tau_afc: comb echo delay (s).
        dead_time: closed period after a storage event (s).
        mode_duration: width of one temporal mode (s).
        eta_inh_override: optional replacement for the dephasing factor used
            in readout-efficiency bookkeeping.  The printed dephasing formula
            and the quoted factor disagree at the operating delay, so both
            are exposed; the formula remains authoritative for
            :func:`spin_wave_efficiency`.
    """

    eta0: float
    gamma_inh: float
    eta_write: float
    tau_afc: float
    dead_time: float
    mode_duration: float
    eta_inh_override: Optional[float] = None

    def __post_init__(self):
        _check_unit_interval("eta0", self.eta0)
        _check_unit_interval("eta_write", self.eta_write)
        if self.gamma_inh < 0:
            raise ValueError(f"gamma_inh must be >= 0, got {self.gamma_inh}")
        if self.tau_afc <= 0:
            raise ValueError(f"tau_afc must be > 0, got {self.tau_afc}")
        if self.dead_time < 0:
            raise ValueError(f"dead_time must be >= 0, got {self.dead_time}")
        if self.mode_duration <= 0:
            raise ValueError(f"mode_duration must be > 0, got {self.mode_duration}")
        if self.eta_inh_override is not None and not (0.0 < self.eta_inh_override <= 1.0):
            raise ValueError(f"eta_inh_override must lie in (0, 1], got {self.eta_inh_override}")


@dataclass(frozen=True)
class SourceModel:
    """Cavity-enhanced pair source parameters for one node.

    Attributes:
        mu: mean pair number per temporal mode at ``pump_power``.
        eta_H: in-fiber heralding efficiency of the idler arm.
        pump_power: operating pump power (mW).
        a_coeff: coefficient of the inverse pump-power law for the
            source cross-correlation (1/mW).
        mu1: input photon number per mode at which the storage
            signal-to-noise ratio reaches one.
    """

    mu: float
    eta_H: float
    pump_power: float
    a_coeff: float
    mu1: float

    def __post_init__(self):
        if self.mu < 0:
            raise ValueError(f"mu must be >= 0, got {self.mu}")
        _check_unit_interval("eta_H", self.eta_H)
        if self.pump_power <= 0:
            raise ValueError(f"pump_power must be > 0, got {self.pump_power}")
        if self.a_coeff <= 0:
            raise ValueError(f"a_coeff must be > 0, got {self.a_coeff}")
        if self.mu1 <= 0:
            raise ValueError(f"mu1 must be > 0, got {self.mu1}")


@dataclass(frozen=True)
class ChannelModel:
    """Optical transmission, detection and mode-overlap parameters.

    Attributes:
        eta_setup: transmission from memory output to the detector fiber.
        eta_det: signal detector efficiency including fiber connections.
        idler_fiber_transmission: heralding-path transmission.
        signal_class_visibility: classical visibility of the signal
            interferometer lock.
        dfg_class_visibility: classical visibility of the idler lock.
        eta_s: signal modal overlap at the mixing beam splitter.
        eta_i: idler modal overlap at the heralding beam splitter.
        dark_count_rate: dark counts per detector (counts/s).
    """

    eta_setup: float
    eta_det: float
    idler_fiber_transmission: float = 1.0
    signal_class_visibility: float = 1.0
    dfg_class_visibility: float = 1.0
    eta_s: float = 1.0
    eta_i: float = 1.0
    dark_count_rate: float = 0.0

    def __post_init__(self):
        for name in ("eta_setup", "eta_det", "idler_fiber_transmission",
                     "signal_class_visibility", "dfg_class_visibility",
                     "eta_s", "eta_i"):
            _check_unit_interval(name, getattr(self, name))
        if self.dark_count_rate < 0:
            raise ValueError(f"dark_count_rate must be >= 0, got {self.dark_count_rate}")


def spin_dephasing_factor(gamma_inh: float, t_spin: float) -> float:
    """Dephasing factor of the spin excitation after a delay ``t_spin``.

    Gaussian decay exp[-(T gamma pi)^2 / (2 ln 2)] driven by the
    inhomogeneous broadening of the spin transition.
    """
    if t_spin < 0:
        raise ValueError(f"spin delay must be >= 0, got {t_spin}")
    if gamma_inh < 0:
        raise ValueError(f"gamma_inh must be >= 0, got {gamma_inh}")
    return math.exp(-((t_spin * gamma_inh * math.pi) ** 2) / (2.0 * LN2))


def spin_wave_efficiency(mem: MemoryModel, t_spin: float) -> float:
    """Full spin-wave storage efficiency at spin delay ``t_spin``.

    Equals ``eta0`` at zero delay and decays with the Gaussian dephasing
    factor; strictly decreasing in the delay for a nonzero linewidth.
    """
    return mem.eta0 * spin_dephasing_factor(mem.gamma_inh, t_spin)


def readout_efficiency(eta_sw: float, eta_write: float, eta_inh: float) -> float:
    """Memory readout efficiency: storage efficiency stripped of the write
    and dephasing contributions, eta_sw / (eta_write * eta_inh)."""
    if eta_write <= 0 or eta_inh <= 0:
        raise ValueError("eta_write and eta_inh must be > 0")
    if eta_sw < 0:
        raise ValueError(f"eta_sw must be >= 0, got {eta_sw}")
    return eta_sw / (eta_write * eta_inh)


def memory_eta_inh(mem: MemoryModel, t_spin: float) -> float:
    """Dephasing factor used in readout bookkeeping; honours the override."""
    if mem.eta_inh_override is not None:
        return mem.eta_inh_override
    return spin_dephasing_factor(mem.gamma_inh, t_spin)


def memory_readout_efficiency(mem: MemoryModel, t_spin: float) -> float:
    """Readout efficiency of a configured memory at spin delay ``t_spin``."""
    return readout_efficiency(
        spin_wave_efficiency(mem, t_spin), mem.eta_write, memory_eta_inh(mem, t_spin)
    )


def g2_afc_vs_pump(src: SourceModel, pump_power: float) -> float:
    """Source cross-correlation (storage in the comb only) at a pump power.

    Inverse law 1 + 1/(a P); approaches 1 for strong pumping.
    """
    if pump_power <= 0:
        raise ValueError(f"pump_power must be > 0, got {pump_power}")
    return 1.0 + 1.0 / (src.a_coeff * pump_power)


def afc_coefficient(g2_afc: float, pump_power: float) -> float:
    """Inverse-law coefficient from a single (g2_afc, pump power) observation."""
    if g2_afc <= 1:
        raise ValueError(f"g2_afc must exceed 1 to calibrate, got {g2_afc}")
    if pump_power <= 0:
        raise ValueError(f"pump_power must be > 0, got {pump_power}")
    return 1.0 / ((g2_afc - 1.0) * pump_power)


def g2_si_model(g2_afc: float, eta_H: float, mu1: float) -> float:
    """Signal-idler cross-correlation after spin-wave storage.

    g2_afc * (eta_H/mu1 + 1) / (eta_H/mu1 + g2_afc): the comb-only
    correlation degraded by control-pulse noise, parameterised by the input
    photon number ``mu1`` that brings the storage SNR to one.  Strictly
    increasing in ``g2_afc`` and bounded above by 1 + eta_H/mu1.
    """
    if g2_afc < 1:
        raise ValueError(f"g2_afc must be >= 1, got {g2_afc}")
    if eta_H <= 0:
        raise ValueError(f"eta_H must be > 0, got {eta_H}")
    if mu1 <= 0:
        raise ValueError(f"mu1 must be > 0, got {mu1}")
    r = eta_H / mu1
    return g2_afc * (r + 1.0) / (r + g2_afc)


def visibility_limit(ch: ChannelModel) -> float:
    """Visibility ceiling set by modal overlaps and the classical locks."""
    return (ch.eta_s * ch.eta_i * ch.signal_class_visibility * ch.dfg_class_visibility)


def visibility_model(ch: ChannelModel, g2_si: float) -> float:
    """Expected single-photon interference visibility at a given g2_si.

    The visibility ceiling times the noise factor (g2-1)/(g2+1); lies in
    [0, visibility_limit) for any finite g2_si > 1.
    """
    if g2_si <= 1:
        raise ValueError(
            f"g2_si must exceed 1 for a positive visibility, got {g2_si}"
        )
    return visibility_limit(ch) * (g2_si - 1.0) / (g2_si + 1.0)


def _threshold_lhs(g2: float) -> float:
    return g2 * math.sqrt(g2 - 1.0) / (2.0 * (g2 + 1.0))


def min_g2_threshold(p00: float, v_lim: float, rel_tol: float = 1e-9) -> float:
    """Smallest g2_si keeping the concurrence positive.

    Solves g2*sqrt(g2-1)/(2(g2+1)) = sqrt(p00)/v_lim by bisection; the left
    side is strictly increasing for g2 > 1, so the bracketed root is unique.
    """
    if not (0.0 < v_lim <= 1.0):
        raise ValueError(f"v_lim must lie in (0, 1], got {v_lim}")
    if not (0.0 < p00 <= 1.0):
        raise ValueError(f"p00 must lie in (0, 1], got {p00}")
    target = math.sqrt(p00) / v_lim
    lo = 1.0 + 1e-15
    hi = 4.0
    while _threshold_lhs(hi) < target:
        hi *= 2.0
        if hi > 1e12:
            raise ValueError("no representable g2 satisfies the inequality")
    while (hi - lo) > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if _threshold_lhs(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def max_pump_factor(src: SourceModel, g2_target: float) -> float:
    """Largest pump-power multiplier keeping g2_si at or above a target.

    Inverts the g2_si model for the required source cross-correlation, then
    the inverse pump law for the power multiplier.  Returns ``inf`` when the
    target holds at any power (g2_target <= 1) and 0.0 when it is
    unreachable even at vanishing pump (g2_target >= 1 + eta_H/mu1).
    """
    if g2_target <= 1.0:
        return math.inf
    r = src.eta_H / src.mu1
    if g2_target >= 1.0 + r:
        return 0.0
    g2_afc_needed = g2_target * r / (r + 1.0 - g2_target)
    g2_afc_now = g2_afc_vs_pump(src, src.pump_power)
    if g2_afc_needed <= 1.0:
        return math.inf
    return (g2_afc_now - 1.0) / (g2_afc_needed - 1.0)
