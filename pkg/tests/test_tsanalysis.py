"""Timestamp-analysis tests on synthetic streams.

Synthetic inputs are built directly (known echo positions, exact Poisson
processes, noiseless fringes) so every expected value is known in closed
form before the operation under test runs.
"""

import math

import numpy as np
import pytest

from qlink import tsanalysis
from qlink.tsanalysis import (
    AnalysisError,
    FringePoint,
    FringeSet,
    ZeroBaselineError,
    build_histogram,
    fringe_fit,
    g2_from_histogram,
    place_window,
    split_true_accidental,
)

PS = 10**12


def ps(seconds):
    return int(round(seconds * PS))


class TestBuildHistogram:
    def test_single_pair_lands_in_one_bin(self):
        tau = 16.5e-6
        h = build_histogram([0], [ps(tau)], 10e-9, (tau - 3e-6, tau + 3e-6))
        assert h.counts.sum() == 1
        assert h.n_heralds == 1
        peak_bin = int(np.argmax(h.counts))
        center = h.origin + (peak_bin + 0.5) * h.bin_width
        assert center == pytest.approx(tau, abs=10e-9)

    def test_empty_signal_stream(self):
        h = build_histogram([0, ps(1e-3)], [], 10e-9, (0.0, 1e-6))
        assert h.counts.sum() == 0
        assert h.n_heralds == 2

    def test_unsorted_input_rejected(self):
        with pytest.raises(AnalysisError):
            build_histogram([10, 5], [0], 10e-9, (0.0, 1e-6))
        with pytest.raises(AnalysisError):
            build_histogram([0], [10, 5], 10e-9, (0.0, 1e-6))

    def test_offsets_binned_exactly(self):
        heralds = [0, ps(1e-3)]
        signals = sorted([ps(1e-3) + 25_000, 15_000, ps(1e-3) + 15_000])
        h = build_histogram(heralds, signals, 10e-9, (0.0, 100e-9))
        assert h.counts[1] == 2  # two offsets of 15 ns
        assert h.counts[2] == 1  # one offset of 25 ns
        assert h.counts.sum() == 3

    def test_merge_requires_same_binning(self):
        h1 = build_histogram([0], [100], 10e-9, (0.0, 1e-6))
        h2 = build_histogram([0], [100], 20e-9, (0.0, 1e-6))
        merged = h1.merge(h1)
        assert merged.n_heralds == 2 and merged.counts.sum() == 2
        with pytest.raises(AnalysisError):
            h1.merge(h2)


class TestWindowPlacement:
    def test_tie_breaks_to_earliest(self):
        h = tsanalysis.CoincidenceHistogram(10_000, 0, np.ones(100, dtype=np.int64), 10)
        p = place_window(h, 30e-9)
        assert p.start_bin == 0

    def test_two_equal_peaks_earliest_wins(self):
        counts = np.zeros(100, dtype=np.int64)
        counts[20] = 5
        counts[70] = 5
        h = tsanalysis.CoincidenceHistogram(10_000, 0, counts, 10)
        p = place_window(h, 10e-9)
        assert p.start_bin == 20

    def test_flat_top_captured_fully(self):
        counts = np.zeros(200, dtype=np.int64)
        counts[80:120] = 7  # 400 ns flat echo
        h = tsanalysis.CoincidenceHistogram(10_000, 0, counts, 100)
        p = place_window(h, 280e-9)
        assert 80 <= p.start_bin and p.start_bin + p.n_bins <= 120

    def test_window_wider_than_span_rejected(self):
        h = tsanalysis.CoincidenceHistogram(10_000, 0, np.ones(10, dtype=np.int64), 1)
        with pytest.raises(AnalysisError):
            place_window(h, 1e-6)


def poisson_stream(rng, rate, t_max):
    n = rng.poisson(rate * t_max)
    return np.sort(rng.integers(0, ps(t_max), size=n))


class TestG2:
    def test_homogeneous_poisson_is_uncorrelated(self):
        rng = np.random.default_rng(1234)
        heralds = poisson_stream(rng, 500.0, 200.0)
        signals = poisson_stream(rng, 300.0, 200.0)
        h = build_histogram(heralds, signals, 10e-9, (10e-6, 22e-6))
        res = g2_from_histogram(h, 280e-9)
        assert abs(res.g2.value - 1.0) <= 3.0 * res.g2.stderr

    def test_calibrated_echo_recovers_target(self):
        # echo uniformly spread over 400 ns on top of a known floor
        rng = np.random.default_rng(99)
        n_her = 200_000
        heralds = np.sort(rng.integers(0, ps(500.0), size=n_her))
        tau, md, window = 16.5e-6, 400e-9, 280e-9
        g2_target, noise_rate = 13.0, 150.0
        p_echo = (g2_target - 1.0) * noise_rate * window / (window / md)
        hit = rng.random(n_her) < p_echo
        echo = heralds[hit] + ps(tau) + rng.integers(-ps(md / 2), ps(md / 2), int(hit.sum()))
        n_noise = rng.poisson(noise_rate * 500.0)
        noise = rng.integers(0, ps(500.0), size=n_noise)
        signals = np.sort(np.concatenate([echo, noise]))
        h = build_histogram(heralds, signals, 10e-9, (tau - 3e-6, tau + 3e-6))
        res = g2_from_histogram(h, window)
        assert abs(res.g2.value - g2_target) <= 3.0 * res.g2.stderr

    def test_flat_histogram_gives_unity(self):
        counts = np.full(600, 50, dtype=np.int64)
        h = tsanalysis.CoincidenceHistogram(10_000, ps(13.5e-6), counts, 100_000)
        res = g2_from_histogram(h, 280e-9)
        assert res.g2.value == pytest.approx(1.0, abs=3 * res.g2.stderr)

    def test_zero_baseline_flagged(self):
        counts = np.zeros(600, dtype=np.int64)
        counts[300] = 40
        h = tsanalysis.CoincidenceHistogram(10_000, 0, counts, 1000)
        with pytest.raises(ZeroBaselineError):
            g2_from_histogram(h, 100e-9)

    def test_noise_window_overlap_rejected(self):
        counts = np.ones(600, dtype=np.int64)
        h = tsanalysis.CoincidenceHistogram(10_000, 0, counts, 1000)
        with pytest.raises(AnalysisError):
            g2_from_histogram(h, 280e-9, noise_windows=((-100e-9, 100e-9),))

    def test_noise_window_outside_span_rejected(self):
        counts = np.ones(100, dtype=np.int64)
        h = tsanalysis.CoincidenceHistogram(10_000, 0, counts, 1000)
        with pytest.raises(AnalysisError):
            g2_from_histogram(h, 100e-9, noise_windows=((-1e-3, -0.9e-3), (1e-6, 2e-6)))


class TestTrueAccidentalSplit:
    def test_sum_equals_raw_probability(self):
        rng = np.random.default_rng(7)
        heralds = poisson_stream(rng, 400.0, 100.0)
        signals = poisson_stream(rng, 200.0, 100.0)
        h = build_histogram(heralds, signals, 10e-9, (10e-6, 22e-6))
        split = split_true_accidental(h, 280e-9)
        raw = tsanalysis.raw_window_probability(h, 280e-9)
        if not split.clamped:
            assert split.p_coinc.value + split.p_acc.value == pytest.approx(
                raw.value, rel=1e-12
            )

    def test_flat_histogram_true_part_clamps_to_zero(self):
        counts = np.full(600, 80, dtype=np.int64)
        h = tsanalysis.CoincidenceHistogram(10_000, 0, counts, 100_000)
        split = split_true_accidental(h, 280e-9)
        assert split.p_coinc.value <= 2.0 * split.p_coinc.stderr

    def test_noiseless_echo_has_zero_accidentals(self):
        counts = np.zeros(600, dtype=np.int64)
        counts[295:305] = 100
        h = tsanalysis.CoincidenceHistogram(10_000, 0, counts, 10_000)
        split = split_true_accidental(h, 100e-9)
        assert split.p_acc.value == 0.0
        assert split.p_coinc.value == pytest.approx(1000 / 10_000)


def synthetic_fringe(v, phi0, amplitude=400.0, n_points=13, herald="I1",
                     signal="S1", integration=600.0):
    points = []
    for k in range(n_points):
        phi = 2.0 * math.pi * k / (n_points - 1)
        rate = amplitude * (1.0 + v * math.cos(phi + phi0))
        points.append(FringePoint(phi, herald, signal,
                                  int(round(rate * integration)), integration))
    return points


class TestFringeFit:
    def test_noiseless_recovery(self):
        fs = FringeSet(synthetic_fringe(0.63, 0.4, amplitude=5e4))
        fit = fringe_fit(fs)[("I1", "S1")]
        assert fit.visibility.value == pytest.approx(0.63, abs=1e-5)
        assert fit.phase.value == pytest.approx(0.4, abs=1e-5)
        assert fit.offset.value == pytest.approx(5e4, rel=1e-4)

    def test_pi_shift_between_heralds(self):
        pts = synthetic_fringe(0.6, 0.2, herald="I1") + \
            synthetic_fringe(0.6, 0.2 + math.pi, herald="I2")
        fits = fringe_fit(FringeSet(pts))
        diff = tsanalysis.phase_difference(fits, "S1")
        assert abs(abs(diff.value) - math.pi) < 1e-4

    def test_global_phase_shift_leaves_visibility(self):
        base = FringeSet(synthetic_fringe(0.55, 0.0, amplitude=2e4))
        shifted = FringeSet([
            FringePoint(p.phase_setpoint + 1.3, p.herald, p.signal,
                        p.coincidences, p.integration)
            for p in base.points
        ])
        v1 = fringe_fit(base)[("I1", "S1")].visibility.value
        v2 = fringe_fit(shifted)[("I1", "S1")].visibility.value
        assert v2 == pytest.approx(v1, abs=1e-9)

    def test_uniform_scaling_leaves_visibility(self):
        base = FringeSet(synthetic_fringe(0.55, 0.0, amplitude=2e4))
        scaled = FringeSet([
            FringePoint(p.phase_setpoint, p.herald, p.signal,
                        p.coincidences * 7, p.integration)
            for p in base.points
        ])
        v1 = fringe_fit(base)[("I1", "S1")].visibility.value
        v2 = fringe_fit(scaled)[("I1", "S1")].visibility.value
        assert v2 == pytest.approx(v1, abs=1e-6)

    def test_too_few_setpoints_rejected(self):
        pts = synthetic_fringe(0.6, 0.0)[:4]
        with pytest.raises(AnalysisError):
            fringe_fit(FringeSet(pts))

    def test_insufficient_span_rejected(self):
        pts = [
            FringePoint(0.5 * k, "I1", "S1", 100, 60.0) for k in range(8)
        ]  # spans 3.5 rad < 2 pi
        with pytest.raises(AnalysisError):
            fringe_fit(FringeSet(pts))

    def test_visibility_clipped_to_unit_interval(self):
        pts = synthetic_fringe(1.0, 0.0, amplitude=50.0)
        # amplify modulation beyond physical range via rounding artifacts
        pts = [FringePoint(p.phase_setpoint, p.herald, p.signal,
                           max(p.coincidences * 2 - 30000 // 600, 0),
                           p.integration) for p in pts]
        fits = fringe_fit(FringeSet(pts))
        assert 0.0 <= fits[("I1", "S1")].visibility.value <= 1.0


class TestTripleCoincidence:
    def test_counts_heralds_with_clicks_on_both_arms(self):
        heralds = np.array([ps(1e-3 * k) for k in range(1, 11)])
        s1 = heralds[:4] + ps(16.5e-6)
        s2 = np.sort(np.concatenate([heralds[:2] + ps(16.5e-6) + 50_000,
                                     heralds[5:7] + ps(16.5e-6)]))
        p = tsanalysis.triple_coincidence_probability(
            heralds, s1, s2, 280e-9, 16.5e-6, 16.5e-6
        )
        assert p.value == pytest.approx(0.2)  # heralds 1 and 2 only
