"""Timestamp-stream analysis.

Everything downstream of the detectors: herald-relative coincidence
histograms, cross-correlation estimates with flanking noise windows,
true/accidental splitting, sinusoidal fringe fits, and the detection-window,
temporal-mode and dead-time sweeps.  All operations are single-pass folds
over time-sorted streams and histograms merge across stream segments, so
arbitrarily long runs can be analysed in fixed memory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .streams import (
    HERALD_CHANNELS,
    PS_PER_S,
    RecordSet,
    SIGNAL_CHANNELS,
)
from .values import ValueWithError, from_counts
from . import tomography


class AnalysisError(RuntimeError):
    """Inputs that cannot be analysed as requested."""


class ZeroBaselineError(AnalysisError):
    """Noise windows contain no counts: the cross-correlation is unbounded."""


class FitError(AnalysisError):
    """Least-squares fringe fit could not be completed."""


def _as_times_ps(stream) -> np.ndarray:
    """Accept an EventStream or a raw int64 array of picosecond times."""
    times = getattr(stream, "time_ps", stream)
    times = np.asarray(times, dtype=np.int64)
    if np.any(np.diff(times) < 0):
        raise AnalysisError("timestamp stream is not sorted")
    return times


def _ps(seconds: float) -> int:
    return int(round(seconds * PS_PER_S))


def _match_ranges(
    heralds: np.ndarray, signals: np.ndarray, lo_ps: int, hi_ps: int
) -> tuple[np.ndarray, np.ndarray]:
    """Flattened (herald index, signal index) pairs with signal-herald offset
    in [lo_ps, hi_ps)."""
    i0 = np.searchsorted(signals, heralds + lo_ps, side="left")
    i1 = np.searchsorted(signals, heralds + hi_ps, side="left")
    lens = i1 - i0
    keep = lens > 0
    total = int(lens.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    starts = i0[keep]
    l = lens[keep]
    # vectorised concatenation of the index ranges [starts, starts + l)
    steps = np.ones(total, dtype=np.int64)
    steps[0] = starts[0]
    bounds = np.cumsum(l)[:-1]
    steps[bounds] = starts[1:] - (starts[:-1] + l[:-1] - 1)
    sig_idx = np.cumsum(steps)
    her_idx = np.repeat(np.flatnonzero(keep), l)
    return her_idx, sig_idx


@dataclass
class CoincidenceHistogram:
    """Signal counts binned by offset from the heralds.

    ``origin_ps`` is the left edge of the first bin, as a herald-relative
    offset; ``n_heralds`` is the number of heralds folded in.
    """

    bin_width_ps: int
    origin_ps: int
    counts: np.ndarray
    n_heralds: int

    def __post_init__(self):
        if self.bin_width_ps <= 0:
            raise AnalysisError("bin width must be positive")
        self.counts = np.asarray(self.counts, dtype=np.int64)

    @property
    def bin_width(self) -> float:
        return self.bin_width_ps / PS_PER_S

    @property
    def origin(self) -> float:
        return self.origin_ps / PS_PER_S

    @property
    def span(self) -> tuple[float, float]:
        hi = self.origin_ps + self.counts.size * self.bin_width_ps
        return (self.origin_ps / PS_PER_S, hi / PS_PER_S)

    def bin_centers(self) -> np.ndarray:
        edges = self.origin_ps + self.bin_width_ps * np.arange(self.counts.size)
        return (edges + 0.5 * self.bin_width_ps) / PS_PER_S

    def merge(self, other: "CoincidenceHistogram") -> "CoincidenceHistogram":
        """Accumulate a histogram with identical binning (for chunked runs)."""
        if (other.bin_width_ps != self.bin_width_ps
                or other.origin_ps != self.origin_ps
                or other.counts.size != self.counts.size):
            raise AnalysisError("cannot merge histograms with different binning")
        return CoincidenceHistogram(
            self.bin_width_ps,
            self.origin_ps,
            self.counts + other.counts,
            self.n_heralds + other.n_heralds,
        )


def build_histogram(
    heralds, signals, bin_width: float, span: tuple[float, float]
) -> CoincidenceHistogram:
    """Histogram signal clicks by their offset from each herald.

    Args:
        heralds: sorted herald timestamps (EventStream or int64 ps array).
        signals: sorted signal timestamps.
        bin_width: bin width in seconds.
        span: (lo, hi) herald-relative offsets in seconds.
    """
    her = _as_times_ps(heralds)
    sig = _as_times_ps(signals)
    bw = _ps(bin_width)
    if bw <= 0:
        raise AnalysisError("bin width must be positive")
    lo = _ps(span[0])
    n_bins = int(math.ceil((_ps(span[1]) - lo) / bw))
    if n_bins <= 0:
        raise AnalysisError(f"empty span {span}")
    counts = np.zeros(n_bins, dtype=np.int64)
    if her.size and sig.size:
        her_idx, sig_idx = _match_ranges(her, sig, lo, lo + n_bins * bw)
        offsets = sig[sig_idx] - her[her_idx]
        np.add.at(counts, (offsets - lo) // bw, 1)
    return CoincidenceHistogram(bw, lo, counts, int(her.size))


@dataclass(frozen=True)
class WindowPlacement:
    """Detection-window position chosen on a histogram."""

    start_bin: int
    n_bins: int
    center_offset_ps: int

    @property
    def center_offset(self) -> float:
        return self.center_offset_ps / PS_PER_S


def place_window(h: CoincidenceHistogram, window: float) -> WindowPlacement:
    """Position a detection window of the given width on the histogram peak.

    The window is slid across the histogram and set where it captures the
    most counts (equivalent to centering on the peak of the boxcar-smoothed
    histogram, which is stable even for flat-topped echo shapes); ties break
    toward the earliest position.
    """
    nw = max(1, int(round(window * PS_PER_S / h.bin_width_ps)))
    if nw > h.counts.size:
        raise AnalysisError("detection window wider than histogram span")
    sums = np.convolve(h.counts, np.ones(nw, dtype=np.int64), mode="valid")
    start = int(np.argmax(sums))  # argmax returns the earliest maximum
    center = h.origin_ps + (start + nw / 2.0) * h.bin_width_ps
    return WindowPlacement(start, nw, int(round(center)))


DEFAULT_NOISE_GAP = 400e-9
DEFAULT_NOISE_WIDTH = 2e-6


def default_noise_windows(
    window: float,
    gap: float = DEFAULT_NOISE_GAP,
    width: float = DEFAULT_NOISE_WIDTH,
    bin_width: float = 10e-9,
) -> tuple[tuple[float, float], tuple[float, float]]:
    """Two flanking noise windows, as offsets from the detection-window center.

    The inner edges sit at least ``gap`` from the center (further out when
    the detection window itself is wider), the outer edges ``width`` beyond.
    """
    inner = max(gap, window / 2.0 + 2.0 * bin_width)
    return ((-inner - width, -inner), (inner, inner + width))


@dataclass(frozen=True)
class WindowCounts:
    """Raw counting result shared by the g2 and true/accidental estimators."""

    placement: WindowPlacement
    n_in_window: int
    n_noise: int
    noise_bins: int
    window_s: float

    @property
    def baseline_in_window(self) -> float:
        """Expected in-window counts from the noise-window rate."""
        return self.n_noise * self.placement.n_bins / self.noise_bins


def _count_windows(
    h: CoincidenceHistogram,
    window: float,
    noise_windows: Optional[Sequence[tuple[float, float]]],
) -> WindowCounts:
    placement = place_window(h, window)
    if noise_windows is None:
        noise_windows = default_noise_windows(window, bin_width=h.bin_width)
    win_lo, win_hi = placement.start_bin, placement.start_bin + placement.n_bins
    n_noise = 0
    noise_bins = 0
    for lo_s, hi_s in noise_windows:
        lo = placement.center_offset_ps + _ps(lo_s)
        hi = placement.center_offset_ps + _ps(hi_s)
        b0 = int((lo - h.origin_ps) // h.bin_width_ps)
        b1 = int((hi - h.origin_ps) // h.bin_width_ps)
        if b0 < 0 or b1 > h.counts.size or b1 <= b0:
            raise AnalysisError(
                f"noise window ({lo_s:g}, {hi_s:g}) s falls outside the histogram span"
            )
        if b0 < win_hi and b1 > win_lo:
            raise AnalysisError("noise window overlaps the detection window")
        n_noise += int(h.counts[b0:b1].sum())
        noise_bins += b1 - b0
    n_in = int(h.counts[win_lo:win_hi].sum())
    return WindowCounts(placement, n_in, n_noise, noise_bins,
                        placement.n_bins * h.bin_width)


@dataclass(frozen=True)
class G2Result:
    g2: ValueWithError
    counts: WindowCounts


def g2_from_histogram(
    h: CoincidenceHistogram,
    window: float,
    noise_windows: Optional[Sequence[tuple[float, float]]] = None,
) -> G2Result:
    """Cross-correlation from in-window counts against the flanking baseline.

    The accidental level inside the detection window is estimated from the
    mean per-bin counts of the two noise windows; the ratio of in-window to
    baseline counts is the cross-correlation, with Poisson errors from both
    count sets.
    """
    wc = _count_windows(h, window, noise_windows)
    if wc.n_noise == 0:
        raise ZeroBaselineError(
            "no counts in the noise windows; cross-correlation is unbounded"
        )
    baseline = wc.baseline_in_window
    g2 = wc.n_in_window / baseline
    rel = math.sqrt(1.0 / max(wc.n_in_window, 1) + 1.0 / wc.n_noise)
    return G2Result(ValueWithError(g2, g2 * rel), wc)


@dataclass(frozen=True)
class TrueAccidentalSplit:
    p_coinc: ValueWithError
    p_acc: ValueWithError
    clamped: bool

    @property
    def p_raw(self) -> float:
        return self.p_coinc.value + self.p_acc.value


def split_true_accidental(
    h: CoincidenceHistogram,
    window: float,
    noise_windows: Optional[Sequence[tuple[float, float]]] = None,
) -> TrueAccidentalSplit:
    """Split the in-window probability into true and accidental parts.

    p_acc is the baseline scaled to the window width; p_coinc is the
    remainder, clamped at zero (and flagged) if fluctuations push it
    negative.  p_coinc + p_acc equals the raw in-window probability exactly
    unless clamped.
    """
    wc = _count_windows(h, window, noise_windows)
    if h.n_heralds <= 0:
        raise AnalysisError("histogram contains no heralds")
    scale = wc.placement.n_bins / wc.noise_bins
    n_her = h.n_heralds
    p_acc = ValueWithError(
        wc.n_noise * scale / n_her, math.sqrt(wc.n_noise) * scale / n_her
    )
    diff = wc.n_in_window - wc.n_noise * scale
    err = math.sqrt(wc.n_in_window + wc.n_noise * scale**2) / n_her
    clamped = diff < 0
    p_coinc = ValueWithError(max(diff, 0.0) / n_her, err)
    return TrueAccidentalSplit(p_coinc, p_acc, clamped)


def raw_window_probability(
    h: CoincidenceHistogram, window: float
) -> ValueWithError:
    """In-window coincidence probability per herald (accidentals included)."""
    placement = place_window(h, window)
    n_in = int(h.counts[placement.start_bin:placement.start_bin + placement.n_bins].sum())
    return from_counts(n_in, h.n_heralds)


# ---------------------------------------------------------------------------
# fringe analysis


@dataclass(frozen=True)
class FringePoint:
    phase_setpoint: float
    herald: str
    signal: str
    coincidences: int
    integration: float


@dataclass
class FringeSet:
    """Phase-tagged coincidence counts for every detector pairing."""

    points: list[FringePoint] = field(default_factory=list)

    def curves(self) -> dict[tuple[str, str], list[FringePoint]]:
        out: dict[tuple[str, str], list[FringePoint]] = {}
        for p in self.points:
            out.setdefault((p.herald, p.signal), []).append(p)
        return out


MIN_SETPOINTS = 5
MIN_SPAN = 2.0 * math.pi - 1e-6


@dataclass(frozen=True)
class FringeFit:
    """Sinusoidal fit of one fringe curve: rate = offset (1 + V cos(phi + phase))."""

    visibility: ValueWithError
    phase: ValueWithError
    offset: ValueWithError
    n_points: int
    residual_rms: float


def fringe_fit(fringes: FringeSet) -> dict[tuple[str, str], FringeFit]:
    """Weighted least-squares fringe fits, one per (herald, signal) pair.

    The angular frequency is fixed at one cycle per 2 pi of commanded phase;
    amplitude, offset and phase are free.  Counts are weighted by their
    Poisson variance.  The fitted visibility is clipped to [0, 1].
    """
    results = {}
    for key, pts in fringes.curves().items():
        phis = np.array([p.phase_setpoint for p in pts])
        if np.unique(phis).size < MIN_SETPOINTS or np.ptp(phis) < MIN_SPAN:
            raise AnalysisError(
                f"curve {key}: need >= {MIN_SETPOINTS} distinct setpoints "
                f"spanning >= 2 pi"
            )
        counts = np.array([p.coincidences for p in pts], dtype=float)
        integ = np.array([p.integration for p in pts], dtype=float)
        if counts.sum() == 0:
            continue  # no recorded coincidences: nothing to fit
        if np.any(integ <= 0):
            raise AnalysisError(f"curve {key}: non-positive integration time")
        rates = counts / integ
        var = np.maximum(counts, 1.0) / integ**2
        design = np.column_stack([np.ones_like(phis), np.cos(phis), np.sin(phis)])
        w = 1.0 / var
        xtwx = design.T @ (design * w[:, None])
        xtwy = design.T @ (w * rates)
        try:
            cov = np.linalg.inv(xtwx)
        except np.linalg.LinAlgError as exc:
            raise FitError(f"curve {key}: singular design matrix") from exc
        beta = cov @ xtwy
        a0, a1, a2 = beta
        resid = rates - design @ beta
        rms = float(np.sqrt(np.mean(resid**2)))
        if a0 <= 0:
            raise FitError(
                f"curve {key}: non-positive mean rate {a0:g} (residual rms {rms:g})"
            )
        amp = math.hypot(a1, a2)
        vis = amp / a0
        if amp > 0:
            jac_v = np.array([-amp / a0**2, a1 / (amp * a0), a2 / (amp * a0)])
            jac_p = np.array([0.0, a2 / amp**2, -a1 / amp**2])
        else:
            jac_v = np.array([0.0, 1.0 / a0, 1.0 / a0])
            jac_p = np.zeros(3)
        vis_err = float(np.sqrt(jac_v @ cov @ jac_v))
        phase_err = float(np.sqrt(jac_p @ cov @ jac_p))
        # a1 cos + a2 sin = amp cos(phi - atan2(a2, a1)); model uses +phase
        phase = -math.atan2(a2, a1)
        results[key] = FringeFit(
            ValueWithError(min(max(vis, 0.0), 1.0), vis_err),
            ValueWithError(phase, phase_err),
            ValueWithError(a0, float(np.sqrt(cov[0, 0]))),
            len(pts),
            rms,
        )
    return results


def mean_visibility(
    fits: dict[tuple[str, str], FringeFit], herald: Optional[str] = None
) -> ValueWithError:
    """Inverse-variance weighted mean fitted visibility, optionally per herald."""
    sel = [f for k, f in fits.items() if herald is None or k[0] == herald]
    if not sel:
        raise AnalysisError(f"no fringe fits for herald {herald}")
    w = np.array([1.0 / max(f.visibility.stderr, 1e-12) ** 2 for f in sel])
    v = np.array([f.visibility.value for f in sel])
    return ValueWithError(float(np.sum(w * v) / np.sum(w)), float(1.0 / math.sqrt(np.sum(w))))


def phase_difference(
    fits: dict[tuple[str, str], FringeFit], signal: str
) -> ValueWithError:
    """Fitted phase difference between the two herald labels at one signal
    detector, wrapped to [-pi, pi)."""
    f1 = fits.get(("I1", signal))
    f2 = fits.get(("I2", signal))
    if f1 is None or f2 is None:
        raise AnalysisError(f"both herald curves required at {signal}")
    delta = (f1.phase.value - f2.phase.value + math.pi) % (2.0 * math.pi) - math.pi
    return ValueWithError(delta, math.hypot(f1.phase.stderr, f2.phase.stderr))


@dataclass
class FringeHistograms:
    """Per-(herald, signal, setpoint) coincidence histograms.

    A window-size-independent reduction of a fringe run: a FringeSet for
    any detection window can be extracted from it, which is what the
    window sweep needs.  Instances with identical layout merge, so chunked
    runs accumulate in fixed memory.
    """

    bin_width_ps: int
    origin_ps: int
    n_bins: int
    setpoints: list[float]
    integration: float
    counts: dict[tuple[str, str, int], np.ndarray] = field(default_factory=dict)
    n_heralds: int = 0

    @classmethod
    def create(cls, bin_width: float, span: tuple[float, float],
               setpoints: Sequence[float], integration: float) -> "FringeHistograms":
        bw = _ps(bin_width)
        lo = _ps(span[0])
        n_bins = int(math.ceil((_ps(span[1]) - lo) / bw))
        return cls(bw, lo, n_bins, list(setpoints), integration)

    def _phase_index(self, phases: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(np.sort(self.setpoints), phases)
        # map values back to positions in the (possibly unsorted) setpoint list
        order = np.argsort(self.setpoints, kind="stable")
        return order[np.clip(idx, 0, len(self.setpoints) - 1)]

    def accumulate(self, records: RecordSet) -> None:
        """Fold one stream segment into the histograms."""
        for hch in HERALD_CHANNELS:
            her = records[hch]
            if not len(her):
                continue
            if np.isnan(her.phase).any():
                raise AnalysisError(
                    "herald stream lacks phase setpoints (not a fringe run?)"
                )
            self.n_heralds += len(her)
            phase_idx = self._phase_index(her.phase)
            for sch in SIGNAL_CHANNELS:
                sig = records[sch]
                if not len(sig):
                    continue
                her_idx, sig_idx = _match_ranges(
                    her.time_ps, sig.time_ps, self.origin_ps,
                    self.origin_ps + self.n_bins * self.bin_width_ps,
                )
                if her_idx.size == 0:
                    continue
                offsets = sig.time_ps[sig_idx] - her.time_ps[her_idx]
                bins = (offsets - self.origin_ps) // self.bin_width_ps
                for k in np.unique(phase_idx[her_idx]):
                    key = (hch, sch, int(k))
                    arr = self.counts.setdefault(
                        key, np.zeros(self.n_bins, dtype=np.int64)
                    )
                    np.add.at(arr, bins[phase_idx[her_idx] == k], 1)

    def combined_histogram(self) -> CoincidenceHistogram:
        total = np.zeros(self.n_bins, dtype=np.int64)
        for arr in self.counts.values():
            total += arr
        return CoincidenceHistogram(self.bin_width_ps, self.origin_ps, total,
                                    self.n_heralds)

    def fringe_set_at(self, window: float) -> FringeSet:
        """Extract the FringeSet for one detection-window size.

        The window is placed once on the summed histogram so that every
        curve shares the same placement.  Setpoints without recorded
        coincidences contribute zero-count points (they still constrain
        the fit).
        """
        placement = place_window(self.combined_histogram(), window)
        lo, hi = placement.start_bin, placement.start_bin + placement.n_bins
        dwell = self.integration / max(len(self.setpoints), 1)
        points = []
        for hch in HERALD_CHANNELS:
            for sch in SIGNAL_CHANNELS:
                for k, phi in enumerate(self.setpoints):
                    arr = self.counts.get((hch, sch, k))
                    n = int(arr[lo:hi].sum()) if arr is not None else 0
                    points.append(FringePoint(phi, hch, sch, n, dwell))
        return FringeSet(points)


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class WindowSweepPoint:
    window: float
    concurrence: ValueWithError
    p11: ValueWithError
    p10: ValueWithError
    p01: ValueWithError
    p_acc_10: ValueWithError
    p_acc_01: ValueWithError
    visibility: ValueWithError
    g2_A: ValueWithError
    g2_B: ValueWithError


def window_sweep(
    hist_A: CoincidenceHistogram,
    hist_B: CoincidenceHistogram,
    fringes: FringeHistograms,
    w_list: Sequence[float],
) -> list[WindowSweepPoint]:
    """Re-run the tomography chain for a series of detection-window sizes.

    ``hist_A``/``hist_B`` come from a direct-detection run (per-node
    coincidence histograms); ``fringes`` from an interference run at the
    same calibration.  Each window size yields the populations, their
    true/accidental split, the modelled two-photon population, the fitted
    visibility and the concurrence.
    """
    if list(w_list) != sorted(w_list):
        raise AnalysisError("window list must be ascending")
    out = []
    for w in w_list:
        split_a = split_true_accidental(hist_A, w)
        split_b = split_true_accidental(hist_B, w)
        p10 = raw_window_probability(hist_A, w)
        p01 = raw_window_probability(hist_B, w)
        p11 = tomography.p11_estimate(
            split_a.p_coinc, split_a.p_acc, split_b.p_coinc, split_b.p_acc
        )
        fits = fringe_fit(fringes.fringe_set_at(w))
        vis = mean_visibility(fits)
        d = tomography.offdiag_from_visibility(vis, p10, p01)
        rho = tomography.assemble(p10, p01, p11, d)
        conc = tomography.concurrence(rho).concurrence
        g2a = g2_from_histogram(hist_A, w).g2
        g2b = g2_from_histogram(hist_B, w).g2
        out.append(WindowSweepPoint(
            w, conc, p11, p10, p01, split_a.p_acc, split_b.p_acc, vis, g2a, g2b
        ))
    return out


@dataclass(frozen=True)
class ModeResolvedPoint:
    n_modes: int
    rate_i1: ValueWithError
    rate_i2: ValueWithError
    visibility_i1: Optional[ValueWithError]
    visibility_i2: Optional[ValueWithError]


def mode_resolved_rates(
    records: RecordSet,
    duration: float,
    n_modes_included: int,
    n_modes_total: int,
    setpoints: Sequence[float],
    window: float,
    bin_width: float,
    span: tuple[float, float],
) -> ModeResolvedPoint:
    """Heralding rates and visibilities restricted to the first n modes.

    Post-processing analogue of shrinking the memory acceptance window:
    heralds with mode index >= ``n_modes_included`` are dropped, signal
    streams are untouched, and rates and fringe visibilities are recomputed.
    """
    if not (0 <= n_modes_included <= n_modes_total):
        raise AnalysisError(
            f"n_modes_included must lie in [0, {n_modes_total}], got {n_modes_included}"
        )
    if duration <= 0:
        raise AnalysisError("duration must be positive")
    rates = {}
    filtered = RecordSet()
    for ch in HERALD_CHANNELS:
        s = records[ch]
        keep = s.mode < n_modes_included
        filtered.streams[ch] = type(s)(
            s.time_ps[keep], s.trial[keep], s.mode[keep], s.phase[keep]
        )
        n = int(keep.sum())
        rates[ch] = ValueWithError(n / duration, math.sqrt(n) / duration)
    vis = {ch: None for ch in HERALD_CHANNELS}
    if n_modes_included > 0:
        for ch in SIGNAL_CHANNELS:
            filtered.streams[ch] = records[ch]
        fh = FringeHistograms.create(bin_width, span, setpoints, duration)
        fh.accumulate(filtered)
        try:
            fits = fringe_fit(fh.fringe_set_at(window))
            for ch in HERALD_CHANNELS:
                if any(k[0] == ch for k in fits):
                    vis[ch] = mean_visibility(fits, herald=ch)
        except (AnalysisError, FitError):
            pass  # too few counts for a fit at small n; rates remain valid
    return ModeResolvedPoint(
        n_modes_included, rates["I1"], rates["I2"], vis["I1"], vis["I2"]
    )


@dataclass(frozen=True)
class DeadTimePoint:
    dead_time: float
    heralding_rate: ValueWithError
    concurrence: ValueWithError


def dead_time_sweep(scenario, dt_list: Sequence[float]) -> list[DeadTimePoint]:
    """Rerun simulation and tomography for each memory dead time.

    ``scenario`` is an interference-run configuration (feed-forward phase
    scan); a direct-detection companion run provides the populations at each
    point.  Dead times shorter than the pump-off time are rejected.
    """
    from . import pipeline  # deferred: pipeline orchestrates the simulator

    for dt in dt_list:
        if dt < scenario.schedule.pump_off_time:
            raise AnalysisError(
                f"dead time {dt:g} s below pump-off time "
                f"{scenario.schedule.pump_off_time:g} s"
            )
    out = []
    for i, dt in enumerate(dt_list):
        summary = pipeline.conditional_tomography_summary(
            pipeline.with_dead_time(scenario, dt, seed_offset=1 + i)
        )
        out.append(DeadTimePoint(dt, summary.heralding_rate, summary.concurrence))
    return out


def triple_coincidence_probability(
    heralds, s1, s2, window: float, center_1: float, center_2: float,
    n_heralds: Optional[int] = None,
) -> ValueWithError:
    """Directly counted two-photon population: fraction of heralds with a
    click on both signal detectors inside their respective windows."""
    her = _as_times_ps(heralds)
    n_her = her.size if n_heralds is None else n_heralds
    if n_her == 0:
        raise AnalysisError("no heralds")
    hits = np.ones(her.size, dtype=bool)
    for sig, center in ((s1, center_1), (s2, center_2)):
        times = _as_times_ps(sig)
        lo = her + _ps(center - window / 2.0)
        hi = her + _ps(center + window / 2.0)
        hits &= np.searchsorted(times, hi) > np.searchsorted(times, lo)
    return from_counts(int(hits.sum()), n_her)
