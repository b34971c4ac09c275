"""Seeded Monte Carlo engine for the heralded entanglement link.

Generates detector click streams for four protocols:

* ``conditional``: storage sequence triggered by each herald, direct
  detection of both memory outputs (population measurements).
* ``fringe_scan``: conditional storage with the memory outputs mixed on a
  beam splitter while the interferometer phase is stepped (coherence
  measurements, optionally with feed-forward phase correction).
* ``unconditional``: pump and control pulses on a fixed clock with a
  multi-mode acceptance window, mixed detection (emulates link latency).
* ``transparency``: storage bypassed, signals transmitted promptly with
  direct detection (high-rate validation of the two-photon estimator).

The model works in the single-excitation sector with classical probability
routing: pair numbers are Poisson per temporal mode, one surviving idler
heralds, the heralded signal survives the storage/transmission chain as a
Bernoulli trial, and interference enters through the beam-splitter routing
probability.  Runs are bit-reproducible for a given (config, seed): event
generation is partitioned into fixed blocks of preparation periods, each
driven by generators spawned from SeedSequence((seed, block, stream)), so
blocks are also independently computable.
"""

from __future__ import annotations

import json
import math
import time as _time
from dataclasses import asdict, dataclass, field
from hashlib import sha256
from typing import Callable, Iterator, Optional

import numpy as np

from . import models
from .models import ChannelModel, MemoryModel, SourceModel
from .streams import CHANNELS, EventStream, NO_TRIAL, PS_PER_S, RecordSet

TOOL_VERSION = "1.0.0"

PROTOCOLS = ("conditional", "unconditional", "fringe_scan", "transparency")

# prep periods simulated per generation block
BLOCK_PREPS = 32
# margin beyond the analysis span kept between a herald and its window end
GUARD_MARGIN = 1e-6

# detection/heralding ratio of the reference conditional run: 0.32 cps of
# summed twofold coincidences at 510 cps heralding
DETECTION_TO_HERALDING_RATIO = 0.32 / 510.0


class ConfigError(ValueError):
    """Scenario configuration rejected before any event is produced."""


@dataclass(frozen=True)
class AnalysisSettings:
    """Default timestamp-analysis parameters carried with a scenario."""

    bin_width: float = 10e-9
    window: float = 280e-9
    noise_gap: float = 400e-9
    noise_width: float = 2e-6
    span_halfwidth: float = 3e-6

    def __post_init__(self):
        for name in ("bin_width", "window", "noise_gap", "noise_width",
                     "span_halfwidth"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"analysis.{name} must be > 0")


@dataclass(frozen=True)
class ScheduleModel:
    """Lock/measure duty cycle, memory preparation and pump gating."""

    t_lock: float
    t_phase: float
    t_meas: float
    prep_period: float
    prep_duration: float
    pump_off_time: float
    spdc_cycle: float = 0.0
    open_window: float = 0.0
    n_modes: int = 1

    def __post_init__(self):
        if self.t_meas <= 0:
            raise ConfigError(f"t_meas must be > 0, got {self.t_meas}")
        for name in ("t_lock", "t_phase", "prep_duration", "pump_off_time",
                     "spdc_cycle", "open_window"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.prep_period <= self.prep_duration:
            raise ConfigError("prep_period must exceed prep_duration")
        if self.n_modes < 1:
            raise ConfigError(f"n_modes must be >= 1, got {self.n_modes}")

    @property
    def lock_cycle(self) -> float:
        return self.t_lock + self.t_phase + self.t_meas

    @property
    def windows_per_prep(self) -> int:
        return int((self.prep_period - self.prep_duration) / self.lock_cycle)


@dataclass(frozen=True)
class ScenarioConfig:
    """Complete parameterisation of one simulated experiment."""

    source_A: SourceModel
    source_B: SourceModel
    memory_A: MemoryModel
    memory_B: MemoryModel
    channel: ChannelModel
    schedule: ScheduleModel
    T_S: float
    protocol: str
    seed: int
    duration: float
    feed_forward: bool = False
    phase_setpoints: tuple[float, ...] = ()
    signal_phase_jitter_sigma: float = 0.0
    analysis: AnalysisSettings = field(default_factory=AnalysisSettings)

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ConfigError(
                f"protocol must be one of {PROTOCOLS}, got {self.protocol!r}"
            )
        if self.T_S < 0:
            raise ConfigError(f"T_S must be >= 0, got {self.T_S}")
        if self.duration < 0:
            raise ConfigError(f"duration must be >= 0, got {self.duration}")
        if self.signal_phase_jitter_sigma < 0:
            raise ConfigError("signal_phase_jitter_sigma must be >= 0")
        if not (-(2**63) <= self.seed < 2**63):
            raise ConfigError("seed must fit a 64-bit integer")
        if self.memory_A.mode_duration != self.memory_B.mode_duration:
            raise ConfigError("nodes must share one temporal-mode duration")
        if self.memory_A.tau_afc != self.memory_B.tau_afc:
            raise ConfigError("nodes must share one comb delay")
        sched = self.schedule
        if self.protocol == "unconditional":
            expected = sched.n_modes * self.memory_A.mode_duration
            if abs(sched.open_window - expected) > 1e-12:
                raise ConfigError(
                    "open_window must equal n_modes * mode_duration "
                    f"({expected:g} s), got {sched.open_window:g} s"
                )
            if sched.spdc_cycle <= 0:
                raise ConfigError("unconditional protocol needs spdc_cycle > 0")
            if sched.spdc_cycle < sched.open_window + self.echo_delay \
                    + self.memory_A.mode_duration:
                raise ConfigError("spdc_cycle too short for echoes to fit")
        if self.protocol in ("conditional", "fringe_scan"):
            dead = min(self.memory_A.dead_time, self.memory_B.dead_time)
            if sched.pump_off_time > dead:
                raise ConfigError("pump_off_time must not exceed the dead time")
        if self._fringe_detection():
            if len(self.phase_setpoints) < 5:
                raise ConfigError("fringe detection needs >= 5 phase setpoints")
            if max(self.phase_setpoints) - min(self.phase_setpoints) \
                    < 2.0 * math.pi - 1e-9:
                raise ConfigError("phase setpoints must span >= 2 pi")

    def _fringe_detection(self) -> bool:
        return self.protocol in ("fringe_scan", "unconditional")

    @property
    def mode_duration(self) -> float:
        return self.memory_A.mode_duration

    @property
    def echo_delay(self) -> float:
        """Herald-to-echo delay: comb delay plus the spin-wave dwell."""
        return self.memory_A.tau_afc + self.T_S

    @property
    def dead_time(self) -> float:
        """Effective storage dead time (both memories close per herald)."""
        return max(self.memory_A.dead_time, self.memory_B.dead_time)


def config_to_dict(cfg: ScenarioConfig) -> dict:
    """Plain-dict form of a scenario (JSON-compatible, schema for files)."""
    doc = asdict(cfg)
    doc["schema_version"] = 1
    return doc


def config_digest(cfg: ScenarioConfig) -> str:
    """Hex digest of the scenario, stable under document key reordering."""
    doc = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return sha256(doc.encode()).hexdigest()


@dataclass
class RunManifest:
    """Provenance record emitted with every simulated run."""

    config_digest: str
    seed: int
    tool_version: str
    protocol: str
    duration: float
    counts_per_channel: dict[str, int]
    n_heralds: int
    wall_time: float

    @property
    def heralding_rate(self) -> float:
        return self.n_heralds / self.duration if self.duration > 0 else 0.0


@dataclass
class RunResult:
    records: RecordSet
    manifest: RunManifest


# ---------------------------------------------------------------------------
# calibration


@dataclass(frozen=True)
class NoiseCalibration:
    """Background rates placing the simulated g2 at the model prediction."""

    rate_A: float
    rate_B: float
    predicted_g2_A: float
    predicted_g2_B: float
    reference_window: float


def _idler_click_rate(src: SourceModel, ch: ChannelModel, md: float) -> float:
    """Idler detections per second at the heralding station while open."""
    return src.mu * src.eta_H * ch.idler_fiber_transmission / md


def _echo_survival(mem: MemoryModel, ch: ChannelModel, t_spin: float) -> float:
    """Write, spin-wave retrieval, setup transmission and detection chain."""
    return (mem.eta_write * models.spin_wave_efficiency(mem, t_spin)
            * ch.eta_setup * ch.eta_det)


def calibrate_noise(cfg: ScenarioConfig) -> NoiseCalibration:
    """Background rate per memory output matching the predicted g2.

    The expected cross-correlation of each node follows from the source's
    pump-power law and the storage SNR parameter mu1.  The accidental rate
    is then set so that the simulated in-window ratio at the scenario's
    reference detection window reproduces that prediction.  Vanishing mu1
    (perfect SNR) gives zero background; a prediction already at the
    accidental floor (or below the dark-count floor) is unattainable and
    rejected.
    """
    ch = cfg.channel
    md = cfg.mode_duration
    window = cfg.analysis.window
    preds = {}
    for label, src in (("A", cfg.source_A), ("B", cfg.source_B)):
        g2_afc = models.g2_afc_vs_pump(src, src.pump_power)
        preds[label] = models.g2_si_model(g2_afc, src.eta_H, src.mu1)
    if cfg.protocol == "transparency":
        # storage bypassed: no control-pulse fluorescence at the output
        return NoiseCalibration(0.0, 0.0, preds["A"], preds["B"], window)
    lam_a = _idler_click_rate(cfg.source_A, ch, md)
    lam_b = _idler_click_rate(cfg.source_B, ch, md)
    total = lam_a + lam_b
    rates = {}
    containment = min(window, md) / md
    for label, lam, mem in (("A", lam_a, cfg.memory_A), ("B", lam_b, cfg.memory_B)):
        if total == 0.0:
            rates[label] = 0.0
            continue
        g2 = preds[label]
        if g2 <= 1.0 + 1e-12:
            raise ConfigError(
                f"node {label}: predicted g2 {g2:g} leaves no room above the "
                "accidental floor (unattainable signal-to-noise)"
            )
        echo_in_window = (lam / total) * _echo_survival(mem, ch, cfg.T_S) * containment
        rate = echo_in_window / ((g2 - 1.0) * window) - ch.dark_count_rate
        if rate < 0.0:
            raise ConfigError(
                f"node {label}: dark counts alone exceed the background needed "
                f"for g2 = {g2:g}"
            )
        rates[label] = rate
    return NoiseCalibration(rates["A"], rates["B"], preds["A"], preds["B"], window)


def duty_cycle(schedule: ScheduleModel) -> float:
    """Fraction of wall time spent measuring single photons."""
    lock_fraction = schedule.t_meas / schedule.lock_cycle
    prep_fraction = 1.0 - schedule.prep_duration / schedule.prep_period
    return lock_fraction * prep_fraction


# ---------------------------------------------------------------------------
# event generation

_STREAMS = ("gaps", "origin", "detector", "survival", "echo_jitter",
            "routing", "noise_s1", "noise_s2", "phase_jitter", "idler", "dark")


class _BlockRng:
    def __init__(self, seed: int, block: int):
        ss = np.random.SeedSequence((seed & 0xFFFFFFFFFFFFFFFF, block))
        children = ss.spawn(len(_STREAMS))
        self._gens = {
            name: np.random.default_rng(child)
            for name, child in zip(_STREAMS, children)
        }

    def __getattr__(self, name):
        try:
            return self._gens[name]
        except KeyError as exc:
            raise AttributeError(name) from exc


@dataclass
class _EngineParams:
    """Values precomputed once per run."""

    lam_a: float
    lam_b: float
    lam_dark_idler: float
    q_a: float
    q_b: float
    noise_s1: float
    noise_s2: float
    v_mode: float
    echo_delay_ps: int
    md_ps: int
    guard_tail: float
    guard_head: float
    setpoints: np.ndarray
    windows_per_setpoint: int
    calibration: NoiseCalibration


def _engine_params(cfg: ScenarioConfig) -> _EngineParams:
    ch = cfg.channel
    md = cfg.mode_duration
    cal = calibrate_noise(cfg)
    fringe = cfg._fringe_detection()
    if cfg.protocol == "transparency":
        q_a = q_b = ch.eta_setup * ch.eta_det
        echo_delay = 0.0
    else:
        q_a = _echo_survival(cfg.memory_A, ch, cfg.T_S)
        q_b = _echo_survival(cfg.memory_B, ch, cfg.T_S)
        echo_delay = cfg.echo_delay
    if fringe:
        noise_s1 = noise_s2 = 0.5 * (cal.rate_A + cal.rate_B) + ch.dark_count_rate
    else:
        noise_s1 = cal.rate_A + ch.dark_count_rate
        noise_s2 = cal.rate_B + ch.dark_count_rate
    span = cfg.analysis.span_halfwidth
    guard_tail = echo_delay + md / 2.0 + span + GUARD_MARGIN
    guard_head = span + GUARD_MARGIN if cfg.protocol == "transparency" else 0.0
    n_sp = max(len(cfg.phase_setpoints), 1)
    total_windows = _count_windows_total(cfg)
    per_sp = max(1, math.ceil(total_windows / n_sp)) if total_windows else 1
    return _EngineParams(
        lam_a=_idler_click_rate(cfg.source_A, ch, md),
        lam_b=_idler_click_rate(cfg.source_B, ch, md),
        lam_dark_idler=ch.dark_count_rate,
        q_a=q_a,
        q_b=q_b,
        noise_s1=noise_s1,
        noise_s2=noise_s2,
        v_mode=ch.eta_s * ch.eta_i * ch.dfg_class_visibility,
        echo_delay_ps=int(round(echo_delay * PS_PER_S)),
        md_ps=int(round(md * PS_PER_S)),
        guard_tail=guard_tail,
        guard_head=guard_head,
        setpoints=np.asarray(cfg.phase_setpoints, dtype=float),
        windows_per_setpoint=per_sp,
        calibration=cal,
    )


def _window_starts(cfg: ScenarioConfig, prep_lo: int, prep_hi: int):
    """Measurement-window start times (s) and global ordinals for a block."""
    sched = cfg.schedule
    w = sched.windows_per_prep
    if w == 0:
        raise ConfigError("no measurement window fits inside one prep period")
    preps = np.arange(prep_lo, prep_hi)
    k = np.arange(w)
    starts = (preps[:, None] * sched.prep_period + sched.prep_duration
              + k[None, :] * sched.lock_cycle + sched.t_lock + sched.t_phase)
    ordinals = preps[:, None] * w + k[None, :]
    starts = starts.ravel()
    ordinals = ordinals.ravel()
    keep = starts + sched.t_meas <= cfg.duration + 1e-12
    return starts[keep], ordinals[keep]


def _count_windows_total(cfg: ScenarioConfig) -> int:
    n_preps = int(math.ceil(cfg.duration / cfg.schedule.prep_period)) if cfg.duration else 0
    if n_preps == 0:
        return 0
    starts, _ = _window_starts(cfg, 0, n_preps)
    return int(starts.size)


def _sample_uniform_ps(rng, lo_ps: np.ndarray, width_ps: int, n: int) -> np.ndarray:
    return lo_ps + rng.integers(0, width_ps, size=n, dtype=np.int64)


def _window_noise(
    rng, starts_ps: np.ndarray, t_meas_ps: int, rate: float, phases: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Homogeneous background clicks over each measurement window."""
    if rate <= 0.0 or starts_ps.size == 0:
        return np.empty(0, dtype=np.int64), np.empty(0)
    counts = rng.poisson(rate * t_meas_ps / PS_PER_S, size=starts_ps.size)
    total = int(counts.sum())
    win = np.repeat(np.arange(starts_ps.size), counts)
    times = _sample_uniform_ps(rng, starts_ps[win], t_meas_ps, total)
    return times, phases[win]


def _route_fringe(
    rng, sign: np.ndarray, phase: np.ndarray, v_mode: float
) -> np.ndarray:
    """Beam-splitter outcome for interfering echoes: True -> S1."""
    p_s1 = 0.5 * (1.0 + sign * v_mode * np.cos(phase))
    return rng.random(sign.size) < p_s1


class _BlockSimulator:
    """Stateful block-by-block generator of detector records."""

    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        self.par = _engine_params(cfg)
        self.trial_base = 0
        sched = cfg.schedule
        self.t_meas_ps = int(round(sched.t_meas * PS_PER_S))
        self.n_preps = (int(math.ceil(cfg.duration / sched.prep_period))
                        if cfg.duration > 0 else 0)

    def blocks(self) -> Iterator[RecordSet]:
        n_blocks = math.ceil(self.n_preps / BLOCK_PREPS)
        for b in range(n_blocks):
            lo = b * BLOCK_PREPS
            hi = min((b + 1) * BLOCK_PREPS, self.n_preps)
            starts, ordinals = _window_starts(self.cfg, lo, hi)
            if starts.size == 0:
                continue
            rng = _BlockRng(self.cfg.seed, b)
            yield self._simulate_windows(rng, starts, ordinals)

    # -- per-window state ---------------------------------------------------

    def _window_phases(self, rng, ordinals: np.ndarray):
        """Commanded setpoint and interferometer jitter per window."""
        par = self.par
        if self.cfg._fringe_detection() and par.setpoints.size:
            idx = np.minimum(ordinals // par.windows_per_setpoint,
                             par.setpoints.size - 1)
            setp = par.setpoints[idx]
        else:
            setp = np.full(ordinals.size, np.nan)
        sigma = self.cfg.signal_phase_jitter_sigma
        jitter = (rng.phase_jitter.normal(0.0, sigma, size=ordinals.size)
                  if sigma > 0 else np.zeros(ordinals.size))
        return setp, jitter

    def _simulate_windows(self, rng, starts, ordinals) -> RecordSet:
        starts_ps = np.round(starts * PS_PER_S).astype(np.int64)
        setp, jitter = self._window_phases(rng, ordinals)
        if self.cfg.protocol in ("conditional", "fringe_scan"):
            rec = self._conditional(rng, starts_ps, setp, jitter)
        elif self.cfg.protocol == "unconditional":
            rec = self._unconditional(rng, starts_ps, setp, jitter)
        else:
            rec = self._transparency(rng, starts_ps, setp)
        self._add_noise(rng, rec, starts_ps, setp)
        return rec

    def _add_noise(self, rng, rec: RecordSet, starts_ps, setp) -> None:
        par = self.par
        for ch, gen, rate in (("S1", rng.noise_s1, par.noise_s1),
                              ("S2", rng.noise_s2, par.noise_s2)):
            times, phases = _window_noise(gen, starts_ps, self.t_meas_ps, rate, setp)
            noise = EventStream.build(times, phase=phases)
            rec.streams[ch] = EventStream.build(
                np.concatenate([rec.streams[ch].time_ps, noise.time_ps]),
                np.concatenate([rec.streams[ch].trial, noise.trial]),
                np.concatenate([rec.streams[ch].mode, noise.mode]),
                np.concatenate([rec.streams[ch].phase, noise.phase]),
            )

    # -- protocol generators --------------------------------------------------

    def _conditional(self, rng, starts_ps, setp, jitter) -> RecordSet:
        cfg, par = self.cfg, self.par
        lam = par.lam_a + par.lam_b + 2.0 * par.lam_dark_idler
        n_win = starts_ps.size
        rec = RecordSet()
        if lam <= 0.0 or n_win == 0:
            return rec
        dead = cfg.dead_time
        live = cfg.schedule.t_meas - par.guard_tail
        if live <= 0:
            raise ConfigError("measurement window shorter than the echo guard")
        mean_n = live / (dead + 1.0 / lam)
        m_max = int(mean_n + 8.0 * math.sqrt(mean_n + 1.0) + 10.0)
        gaps = rng.gaps.exponential(1.0 / lam, size=(n_win, m_max))
        gaps[:, 1:] += dead
        t_rel = np.cumsum(gaps, axis=1)
        valid = t_rel <= live
        if valid[:, -1].any():
            raise RuntimeError("herald buffer overflow; raise m_max margin")
        win_idx, _ = np.nonzero(valid)
        t_her = (starts_ps[win_idx]
                 + np.round(t_rel[valid] * PS_PER_S).astype(np.int64))
        n = t_her.size
        trials = self.trial_base + np.arange(n, dtype=np.int64)
        self.trial_base += n

        # herald origin: node A pair, node B pair, or idler dark count
        u = rng.origin.random(n)
        p_a = par.lam_a / lam
        p_b = par.lam_b / lam
        origin = np.where(u < p_a, 0, np.where(u < p_a + p_b, 1, 2))
        to_i1 = rng.detector.random(n) < 0.5
        sign = np.where(to_i1, 1.0, -1.0)
        phases = setp[win_idx]

        for ch, mask in (("I1", to_i1), ("I2", ~to_i1)):
            rec.streams[ch] = EventStream.build(
                t_her[mask], trials[mask], None, phases[mask]
            )

        q = np.array([par.q_a, par.q_b, 0.0])[origin]
        surv = rng.survival.random(n) < q
        t_echo = (t_her[surv] + par.echo_delay_ps
                  + rng.echo_jitter.integers(-par.md_ps // 2, par.md_ps // 2,
                                             size=int(surv.sum()), dtype=np.int64))
        if cfg.protocol == "fringe_scan":
            phi = setp[win_idx[surv]] + jitter[win_idx[surv]]
            if cfg.feed_forward:
                phi = phi + np.where(to_i1[surv], 0.0, math.pi)
            s1 = _route_fringe(rng.routing, sign[surv], phi, par.v_mode)
        else:
            s1 = origin[surv] == 0
        for ch, mask in (("S1", s1), ("S2", ~s1)):
            rec.streams[ch] = EventStream.build(
                t_echo[mask], trials[surv][mask], None, setp[win_idx[surv]][mask]
            )
        return rec

    def _unconditional(self, rng, starts_ps, setp, jitter) -> RecordSet:
        cfg, par = self.cfg, self.par
        sched = cfg.schedule
        n_win = starts_ps.size
        rec = RecordSet()
        n_cyc = int((sched.t_meas - par.guard_tail) / sched.spdc_cycle)
        if n_cyc <= 0:
            raise ConfigError("measurement window shorter than one pump cycle")
        cycle_ps = int(round(sched.spdc_cycle * PS_PER_S))
        open_ps = sched.n_modes * par.md_ps
        cyc_start = (starts_ps[:, None]
                     + cycle_ps * np.arange(n_cyc, dtype=np.int64)[None, :]).ravel()
        win_of_cyc = np.repeat(np.arange(n_win), n_cyc)

        open_s = sched.open_window
        pair_time, pair_node, pair_win = [], [], []
        for node, src in ((0, cfg.source_A), (1, cfg.source_B)):
            lam_pairs = src.mu / cfg.mode_duration
            counts = rng.gaps.poisson(lam_pairs * open_s, size=cyc_start.size)
            total = int(counts.sum())
            cyc = np.repeat(np.arange(cyc_start.size), counts)
            pair_time.append(_sample_uniform_ps(rng.gaps, cyc_start[cyc],
                                                open_ps, total))
            pair_node.append(np.full(total, node, dtype=np.int8))
            pair_win.append(win_of_cyc[cyc])
        t_pair = np.concatenate(pair_time)
        node = np.concatenate(pair_node)
        win_idx = np.concatenate(pair_win)
        order = np.argsort(t_pair, kind="stable")
        t_pair, node, win_idx = t_pair[order], node[order], win_idx[order]
        n = t_pair.size
        cyc_of_pair = (t_pair - starts_ps[win_idx]) // cycle_ps
        offs = t_pair - (starts_ps[win_idx] + cyc_of_pair * cycle_ps)
        mode = (offs // par.md_ps).astype(np.int32)

        eta_idler = (cfg.channel.idler_fiber_transmission
                     * np.where(node == 0, cfg.source_A.eta_H, cfg.source_B.eta_H))
        heralded = rng.idler.random(n) < eta_idler
        n_her = int(heralded.sum())
        trials = np.full(n, NO_TRIAL, dtype=np.int64)
        trials[heralded] = self.trial_base + np.arange(n_her, dtype=np.int64)
        self.trial_base += n_her
        to_i1 = np.zeros(n, dtype=bool)
        to_i1[heralded] = rng.detector.random(n_her) < 0.5
        phases = setp[win_idx]

        # idler dark counts inside the acceptance window also herald
        dark_t, dark_win, dark_mode = self._open_window_darks(
            rng, cyc_start, win_of_cyc, open_ps
        )
        for ch, mask in (("I1", to_i1 & heralded), ("I2", ~to_i1 & heralded)):
            rec.streams[ch] = EventStream.build(
                t_pair[mask], trials[mask], mode[mask], phases[mask]
            )
        if dark_t.size:
            half = rng.detector.random(dark_t.size) < 0.5
            for ch, m in (("I1", half), ("I2", ~half)):
                base = rec.streams[ch]
                extra = EventStream.build(dark_t[m], None, dark_mode[m],
                                          setp[dark_win[m]])
                rec.streams[ch] = EventStream.build(
                    np.concatenate([base.time_ps, extra.time_ps]),
                    np.concatenate([base.trial, extra.trial]),
                    np.concatenate([base.mode, extra.mode]),
                    np.concatenate([base.phase, extra.phase]),
                )

        q = np.where(node == 0, par.q_a, par.q_b)
        surv = rng.survival.random(n) < q
        ns = int(surv.sum())
        t_echo = (t_pair[surv] + par.echo_delay_ps
                  + rng.echo_jitter.integers(-par.md_ps // 2, par.md_ps // 2,
                                             size=ns, dtype=np.int64))
        sign = np.where(to_i1[surv], 1.0, -1.0)
        phi = setp[win_idx[surv]] + jitter[win_idx[surv]]
        if cfg.feed_forward:
            phi = phi + np.where(to_i1[surv], 0.0, math.pi)
        s1 = _route_fringe(rng.routing, sign, phi, par.v_mode)
        # echoes of unheralded pairs carry no herald phase: split evenly
        unher = ~heralded[surv]
        s1[unher] = rng.routing.random(int(unher.sum())) < 0.5
        for ch, mask in (("S1", s1), ("S2", ~s1)):
            rec.streams[ch] = EventStream.build(
                t_echo[mask], trials[surv][mask], mode[surv][mask],
                setp[win_idx[surv]][mask],
            )
        return rec

    def _open_window_darks(self, rng, cyc_start, win_of_cyc, open_ps):
        rate = self.par.lam_dark_idler * 2.0  # two idler detectors
        if rate <= 0.0:
            empty = np.empty(0, dtype=np.int64)
            return empty, empty, np.empty(0, dtype=np.int32)
        per_cycle = rate * open_ps / PS_PER_S
        counts = rng.dark.poisson(per_cycle, size=cyc_start.size)
        total = int(counts.sum())
        cyc = np.repeat(np.arange(cyc_start.size), counts)
        times = _sample_uniform_ps(rng.dark, cyc_start[cyc], open_ps, total)
        mode = ((times - cyc_start[cyc]) // self.par.md_ps).astype(np.int32)
        return times, win_of_cyc[cyc], mode

    def _transparency(self, rng, starts_ps, setp) -> RecordSet:
        cfg, par = self.cfg, self.par
        n_win = starts_ps.size
        rec = RecordSet()
        pair_time, pair_node, pair_win = [], [], []
        for node_id, src in ((0, cfg.source_A), (1, cfg.source_B)):
            lam_pairs = src.mu / cfg.mode_duration
            counts = rng.gaps.poisson(lam_pairs * cfg.schedule.t_meas, size=n_win)
            total = int(counts.sum())
            win = np.repeat(np.arange(n_win), counts)
            pair_time.append(_sample_uniform_ps(rng.gaps, starts_ps[win],
                                                self.t_meas_ps, total))
            pair_node.append(np.full(total, node_id, dtype=np.int8))
            pair_win.append(win)
        t_pair = np.concatenate(pair_time)
        node = np.concatenate(pair_node)
        win_idx = np.concatenate(pair_win)
        order = np.argsort(t_pair, kind="stable")
        t_pair, node, win_idx = t_pair[order], node[order], win_idx[order]
        n = t_pair.size

        eta_idler = (cfg.channel.idler_fiber_transmission
                     * np.where(node == 0, cfg.source_A.eta_H, cfg.source_B.eta_H))
        head = np.round(par.guard_head * PS_PER_S).astype(np.int64)
        tail = np.round(par.guard_tail * PS_PER_S).astype(np.int64)
        in_accept = ((t_pair >= starts_ps[win_idx] + head)
                     & (t_pair <= starts_ps[win_idx] + self.t_meas_ps - tail))
        heralded = (rng.idler.random(n) < eta_idler) & in_accept
        n_her = int(heralded.sum())
        trials = np.full(n, NO_TRIAL, dtype=np.int64)
        trials[heralded] = self.trial_base + np.arange(n_her, dtype=np.int64)
        self.trial_base += n_her
        to_i1 = np.zeros(n, dtype=bool)
        to_i1[heralded] = rng.detector.random(n_her) < 0.5
        phases = setp[win_idx]
        for ch, mask in (("I1", to_i1 & heralded), ("I2", ~to_i1 & heralded)):
            rec.streams[ch] = EventStream.build(
                t_pair[mask], trials[mask], None, phases[mask]
            )
        q = np.where(node == 0, par.q_a, par.q_b)
        surv = rng.survival.random(n) < q
        ns = int(surv.sum())
        t_sig = (t_pair[surv]
                 + rng.echo_jitter.integers(-par.md_ps // 2, par.md_ps // 2,
                                            size=ns, dtype=np.int64))
        s1 = node[surv] == 0
        for ch, mask in (("S1", s1), ("S2", ~s1)):
            rec.streams[ch] = EventStream.build(
                t_sig[mask], trials[surv][mask], None, setp[win_idx[surv]][mask]
            )
        return rec


def iter_blocks(cfg: ScenarioConfig) -> Iterator[RecordSet]:
    """Yield the run's detector records block by block (fixed memory)."""
    yield from _BlockSimulator(cfg).blocks()


def run_folded(
    cfg: ScenarioConfig, fold: Optional[Callable[[RecordSet], None]] = None
) -> RunManifest:
    """Simulate the scenario, folding each block into ``fold``."""
    t0 = _time.perf_counter()
    counts = {c: 0 for c in CHANNELS}
    n_heralds = 0
    for block in iter_blocks(cfg):
        for c in CHANNELS:
            counts[c] += len(block[c])
        n_heralds += block.n_heralds()
        if fold is not None:
            fold(block)
    return RunManifest(
        config_digest=config_digest(cfg),
        seed=cfg.seed,
        tool_version=TOOL_VERSION,
        protocol=cfg.protocol,
        duration=cfg.duration,
        counts_per_channel=counts,
        n_heralds=n_heralds,
        wall_time=_time.perf_counter() - t0,
    )


def run(cfg: ScenarioConfig) -> RunResult:
    """Simulate the scenario and return all records plus the manifest."""
    parts: list[RecordSet] = []
    manifest = run_folded(cfg, parts.append)
    records = RecordSet.concatenate(parts) if parts else RecordSet()
    return RunResult(records, manifest)


# ---------------------------------------------------------------------------
# closed-form rate budget


@dataclass(frozen=True)
class RateBudget:
    """Heralding and detection rates with the factor that limits them."""

    heralding_rate: float
    heralding_rate_per_detector: float
    detection_rate: float
    limiting_factor: str
    saturation_cap: float
    arm_transmission: float
    baseline_rate: float

    def __post_init__(self):
        if self.detection_rate > self.heralding_rate + 1e-12:
            raise ValueError("detection rate cannot exceed the heralding rate")


def link_budget(
    cfg: ScenarioConfig,
    fiber_length_km: float,
    loss_db_per_km: float,
    pump_factor: float = 1.0,
    detection_ratio: float = DETECTION_TO_HERALDING_RATIO,
) -> RateBudget:
    """Closed-form heralding/detection rates over a fiber link.

    The unconditional multiplexed schedule of ``cfg`` sets the baseline;
    the pump factor scales the per-mode herald probability and each idler
    travels half the total link length, so the fiber transmission enters
    once per herald.  The achievable rate saturates at (measurement duty) /
    (memory dead time).  The detection rate applies a fixed
    detection-to-heralding ratio taken from the conditional reference run.

    Args:
        cfg: unconditional scenario to scale.
        fiber_length_km: total node-to-node distance (each arm covers half).
        loss_db_per_km: fiber attenuation.
        pump_factor: pump-power multiplier applied to both sources.
        detection_ratio: detected coincidences per herald.
    """
    if cfg.protocol != "unconditional":
        raise ConfigError("link budget requires an unconditional scenario")
    if fiber_length_km < 0 or loss_db_per_km < 0:
        raise ConfigError("fiber length and loss must be >= 0")
    if pump_factor <= 0:
        raise ConfigError("pump_factor must be > 0")
    if not (0.0 <= detection_ratio <= 1.0):
        raise ConfigError("detection_ratio must lie in [0, 1]")
    sched = cfg.schedule
    par = _engine_params(cfg)
    arm_db = loss_db_per_km * fiber_length_km / 2.0
    arm_transmission = 10.0 ** (-arm_db / 10.0)
    windows_per_s = sched.windows_per_prep / sched.prep_period
    n_cyc = int((sched.t_meas - par.guard_tail) / sched.spdc_cycle)
    herald_per_mode = (
        (cfg.source_A.mu * cfg.source_A.eta_H + cfg.source_B.mu * cfg.source_B.eta_H)
        * cfg.channel.idler_fiber_transmission
    )
    baseline = windows_per_s * n_cyc * sched.n_modes * herald_per_mode
    raw = baseline * pump_factor * arm_transmission
    duty = windows_per_s * sched.t_meas
    cap = duty / cfg.dead_time
    heralding = min(raw, cap)
    # report the factor whose idealisation would raise the rate most;
    # an uncapped, low-loss, high-duty link is limited by pump power alone
    if raw >= cap:
        limiting = "dead_time"
    else:
        duty_gain = 1.0 / duty
        fiber_gain = 1.0 / arm_transmission
        if max(duty_gain, fiber_gain) < 1.5:
            limiting = "pump"
        elif duty_gain >= fiber_gain:
            limiting = "duty_cycle"
        else:
            limiting = "fiber_loss"
    return RateBudget(
        heralding_rate=heralding,
        heralding_rate_per_detector=heralding / 2.0,
        detection_rate=heralding * detection_ratio,
        limiting_factor=limiting,
        saturation_cap=cap,
        arm_transmission=arm_transmission,
        baseline_rate=baseline,
    )
