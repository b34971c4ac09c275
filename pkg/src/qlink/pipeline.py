"""Run-level orchestration: simulate, accumulate, analyse.

Glue between the Monte Carlo engine and the stream analyses: folds block
streams into histogram accumulators (so arbitrarily long runs use fixed
memory), assembles tomography summaries from paired direct-detection and
interference runs, and drives the transparency-mode and temporal-mode
studies.  The command-line interface and the sweep commands are thin
wrappers over this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from . import tomography, tsanalysis
from .linksim import RunManifest, ScenarioConfig, iter_blocks, run_folded
from .streams import HERALD_CHANNELS, RecordSet
from .tsanalysis import CoincidenceHistogram, FringeHistograms
from .values import ValueWithError


def echo_center(cfg: ScenarioConfig) -> float:
    """Expected herald-relative signal offset for the scenario."""
    return 0.0 if cfg.protocol == "transparency" else cfg.echo_delay


def analysis_span(cfg: ScenarioConfig) -> tuple[float, float]:
    c = echo_center(cfg)
    return (c - cfg.analysis.span_halfwidth, c + cfg.analysis.span_halfwidth)


def merged_heralds(block: RecordSet) -> np.ndarray:
    """Time-sorted union of both herald detectors."""
    return np.sort(np.concatenate(
        [block[ch].time_ps for ch in HERALD_CHANNELS]
    ))


@dataclass
class DiagonalData:
    """Per-node coincidence histograms from a direct-detection run."""

    hist_A: CoincidenceHistogram
    hist_B: CoincidenceHistogram
    manifest: RunManifest


def run_diagonal(cfg: ScenarioConfig) -> DiagonalData:
    """Simulate a direct-detection scenario and fold the histograms."""
    span = analysis_span(cfg)
    bw = cfg.analysis.bin_width
    hists = {}

    def fold(block: RecordSet) -> None:
        her = merged_heralds(block)
        for key, sig in (("A", block["S1"]), ("B", block["S2"])):
            h = tsanalysis.build_histogram(her, sig, bw, span)
            hists[key] = hists[key].merge(h) if key in hists else h

    manifest = run_folded(cfg, fold)
    if not hists:
        empty = tsanalysis.build_histogram(
            np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64), bw, span
        )
        hists = {"A": empty, "B": empty}
    return DiagonalData(hists["A"], hists["B"], manifest)


@dataclass
class FringeData:
    """Phase-resolved coincidence histograms from an interference run."""

    histograms: FringeHistograms
    manifest: RunManifest

    def heralding_rate(self) -> ValueWithError:
        m = self.manifest
        if m.duration <= 0:
            return ValueWithError(0.0, 0.0)
        return ValueWithError(m.n_heralds / m.duration,
                              math.sqrt(m.n_heralds) / m.duration)


def run_fringe(cfg: ScenarioConfig) -> FringeData:
    """Simulate an interference scenario and fold the fringe histograms."""
    fh = FringeHistograms.create(
        cfg.analysis.bin_width, analysis_span(cfg), list(cfg.phase_setpoints),
        cfg.duration,
    )
    manifest = run_folded(cfg, fh.accumulate)
    return FringeData(fh, manifest)


@dataclass
class TomographySummary:
    """Everything the state reconstruction yields at one detection window."""

    window: float
    p10: ValueWithError
    p01: ValueWithError
    p11: ValueWithError
    p_acc_10: ValueWithError
    p_acc_01: ValueWithError
    g2_A: ValueWithError
    g2_B: ValueWithError
    h2c: ValueWithError
    visibility: dict[str, ValueWithError]
    elements: dict[str, tomography.DensityMatrixElements]
    concurrence_by_label: dict[str, tomography.ConcurrenceResult]
    effective_fidelity: ValueWithError
    heralding_rate: ValueWithError
    phase_difference: dict[str, ValueWithError]

    @property
    def concurrence(self) -> ValueWithError:
        return self.concurrence_by_label["combined"].concurrence


_HERALD_SIGN = {"I1": +1, "I2": -1}
_HERALD_LABEL = {"I1": "i1", "I2": "i2"}


def tomography_summary(
    diag: DiagonalData, fringe: FringeData, window: Optional[float] = None
) -> TomographySummary:
    """Reconstruct the heralded state from a direct run and a fringe run.

    Populations and their true/accidental split come from the per-node
    histograms; coherences from the fitted visibilities, signed by the
    heralding detector.  With feed-forward both detectors herald the same
    state, which is the ``combined`` entry.
    """
    if window is None:
        window = 280e-9
    split_a = tsanalysis.split_true_accidental(diag.hist_A, window)
    split_b = tsanalysis.split_true_accidental(diag.hist_B, window)
    p10 = tsanalysis.raw_window_probability(diag.hist_A, window)
    p01 = tsanalysis.raw_window_probability(diag.hist_B, window)
    p11 = tomography.p11_estimate(
        split_a.p_coinc, split_a.p_acc, split_b.p_coinc, split_b.p_acc
    )
    g2_a = tsanalysis.g2_from_histogram(diag.hist_A, window).g2
    g2_b = tsanalysis.g2_from_histogram(diag.hist_B, window).g2
    h2c = tomography.two_photon_suppression(
        tomography.assemble(p10, p01, p11, ValueWithError(0.0, 0.0))
    )
    fits = tsanalysis.fringe_fit(fringe.histograms.fringe_set_at(window))
    vis = {}
    elements = {}
    conc = {}
    for hch in HERALD_CHANNELS:
        if not any(k[0] == hch for k in fits):
            continue
        label = _HERALD_LABEL[hch]
        v = tsanalysis.mean_visibility(fits, herald=hch)
        vis[label] = v
        d = tomography.offdiag_from_visibility(v, p10, p01, _HERALD_SIGN[hch])
        elements[label] = tomography.assemble(p10, p01, p11, d, label)
        conc[label] = tomography.concurrence(elements[label])
    v_all = tsanalysis.mean_visibility(fits)
    vis["combined"] = v_all
    d_all = tomography.offdiag_from_visibility(v_all, p10, p01, +1)
    elements["combined"] = tomography.assemble(p10, p01, p11, d_all, "combined")
    conc["combined"] = tomography.concurrence(elements["combined"])
    feff = tomography.effective_fidelity(elements["combined"])
    phase_diff = {}
    for sch in ("S1", "S2"):
        try:
            phase_diff[sch] = tsanalysis.phase_difference(fits, sch)
        except tsanalysis.AnalysisError:
            pass
    return TomographySummary(
        window=window,
        p10=p10, p01=p01, p11=p11,
        p_acc_10=split_a.p_acc, p_acc_01=split_b.p_acc,
        g2_A=g2_a, g2_B=g2_b, h2c=h2c,
        visibility=vis,
        elements=elements,
        concurrence_by_label=conc,
        effective_fidelity=feff,
        heralding_rate=fringe.heralding_rate(),
        phase_difference=phase_diff,
    )


def diagonal_companion(fringe_cfg: ScenarioConfig, seed_offset: int = 101) -> ScenarioConfig:
    """Direct-detection twin of an interference scenario (same calibration)."""
    return replace(
        fringe_cfg,
        protocol="conditional",
        feed_forward=False,
        phase_setpoints=(),
        signal_phase_jitter_sigma=0.0,
        seed=fringe_cfg.seed + seed_offset,
    )


def conditional_tomography_summary(
    fringe_cfg: ScenarioConfig, window: Optional[float] = None
) -> TomographySummary:
    """Run an interference scenario plus its direct twin and reconstruct."""
    diag = run_diagonal(diagonal_companion(fringe_cfg))
    fr = run_fringe(fringe_cfg)
    return tomography_summary(diag, fr, window or fringe_cfg.analysis.window)


def with_dead_time(cfg: ScenarioConfig, dead_time: float,
                   seed_offset: int = 0) -> ScenarioConfig:
    """Scenario with both memories at a new dead time."""
    return replace(
        cfg,
        memory_A=replace(cfg.memory_A, dead_time=dead_time),
        memory_B=replace(cfg.memory_B, dead_time=dead_time),
        seed=cfg.seed + seed_offset,
    )


# ---------------------------------------------------------------------------
# transparency-mode validation


@dataclass(frozen=True)
class TransparencyPoint:
    window: float
    p11_direct: ValueWithError
    p11_estimate: ValueWithError


@dataclass
class TransparencyResult:
    points: list[TransparencyPoint]
    manifest: RunManifest

    def at(self, window: float) -> TransparencyPoint:
        for p in self.points:
            if abs(p.window - window) < 1e-12:
                return p
        raise KeyError(f"no transparency point at window {window}")


def transparency_p11(
    cfg: ScenarioConfig, windows: Optional[Sequence[float]] = None
) -> TransparencyResult:
    """Compare directly counted and modelled two-photon populations.

    Runs the no-storage scenario, then for each detection window counts
    triple coincidences directly and evaluates the true/accidental model
    from the same streams.
    """
    if cfg.protocol != "transparency":
        raise ValueError("transparency_p11 requires a transparency scenario")
    if windows is None:
        windows = [cfg.analysis.window]
    span = analysis_span(cfg)
    bw = cfg.analysis.bin_width
    hists: dict[str, CoincidenceHistogram] = {}
    heralds_blocks = []
    s1_blocks = []
    s2_blocks = []

    def fold(block: RecordSet) -> None:
        her = merged_heralds(block)
        heralds_blocks.append(her)
        s1_blocks.append(block["S1"].time_ps)
        s2_blocks.append(block["S2"].time_ps)
        for key, sig in (("A", block["S1"]), ("B", block["S2"])):
            h = tsanalysis.build_histogram(her, sig, bw, span)
            hists[key] = hists[key].merge(h) if key in hists else h

    manifest = run_folded(cfg, fold)
    her = (np.concatenate(heralds_blocks) if heralds_blocks
           else np.empty(0, dtype=np.int64))
    s1 = np.concatenate(s1_blocks) if s1_blocks else np.empty(0, dtype=np.int64)
    s2 = np.concatenate(s2_blocks) if s2_blocks else np.empty(0, dtype=np.int64)
    points = []
    for w in windows:
        split_a = tsanalysis.split_true_accidental(hists["A"], w)
        split_b = tsanalysis.split_true_accidental(hists["B"], w)
        est = tomography.p11_estimate(
            split_a.p_coinc, split_a.p_acc, split_b.p_coinc, split_b.p_acc
        )
        c1 = tsanalysis.place_window(hists["A"], w).center_offset
        c2 = tsanalysis.place_window(hists["B"], w).center_offset
        direct = tsanalysis.triple_coincidence_probability(
            her, s1, s2, w, c1, c2
        )
        points.append(TransparencyPoint(w, direct, est))
    return TransparencyResult(points, manifest)


# ---------------------------------------------------------------------------
# temporal-mode study


@dataclass(frozen=True)
class LinearFit:
    slope: ValueWithError
    intercept: ValueWithError
    r_squared: float


def linear_fit(x: Sequence[float], y: Sequence[float],
               yerr: Optional[Sequence[float]] = None) -> LinearFit:
    """Weighted straight-line fit with parameter errors and R^2."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two points")
    w = (np.ones_like(x) if yerr is None
         else 1.0 / np.maximum(np.asarray(yerr, dtype=float), 1e-300) ** 2)
    design = np.column_stack([x, np.ones_like(x)])
    cov = np.linalg.inv(design.T @ (design * w[:, None]))
    beta = cov @ (design.T @ (w * y))
    resid = y - design @ beta
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return LinearFit(
        ValueWithError(float(beta[0]), float(np.sqrt(cov[0, 0]))),
        ValueWithError(float(beta[1]), float(np.sqrt(cov[1, 1]))),
        r2,
    )


@dataclass
class ModeSweepResult:
    points: list[tsanalysis.ModeResolvedPoint]
    slope_per_detector: ValueWithError
    r_squared: float
    manifest: RunManifest


def mode_sweep(cfg: ScenarioConfig,
               n_list: Optional[Sequence[int]] = None) -> ModeSweepResult:
    """Heralding rate and visibility versus the number of included modes.

    One unconditional run is post-processed repeatedly, restricting the
    heralds to the first n temporal modes; the mean per-detector rate is
    fitted linearly against n.
    """
    if cfg.protocol != "unconditional":
        raise ValueError("mode_sweep requires an unconditional scenario")
    parts: list[RecordSet] = []
    manifest = run_folded(cfg, parts.append)
    records = RecordSet.concatenate(parts) if parts else RecordSet()
    n_total = cfg.schedule.n_modes
    if n_list is None:
        n_list = list(range(1, n_total + 1))
    span = analysis_span(cfg)
    points = [
        tsanalysis.mode_resolved_rates(
            records, cfg.duration, n, n_total, list(cfg.phase_setpoints),
            cfg.analysis.window, cfg.analysis.bin_width, span,
        )
        for n in n_list
    ]
    mean_rates = [0.5 * (p.rate_i1.value + p.rate_i2.value) for p in points]
    errs = [0.5 * math.hypot(p.rate_i1.stderr, p.rate_i2.stderr) for p in points]
    fit = linear_fit(list(n_list), mean_rates, errs)
    return ModeSweepResult(points, fit.slope, fit.r_squared, manifest)
