"""Tracker pipeline: trimming, beat search, meter/phase, next measure."""

import math

import numpy as np
import pytest

from pulsetrack.kernels import KernelConfig, NoteEventSet
from pulsetrack.tracker import (
    BeatEstimate,
    InsufficientData,
    TrackerConfig,
    UnsupportedMeter,
    analyze,
    estimate_beat,
    estimate_meter,
    generate_prototype,
    predict_next_measure_onset,
    trim_window,
)


def naive_beat_choice(events, cfg):
    # Independent re-derivation: per-lag loop, full dense matrices, scalar
    # salience.  Returns the winning lag.
    sigma = cfg.kernel.sigma
    ts = cfg.kernel.spontaneous_tempo
    d = events.onsets[:, None] - events.onsets[None, :]
    w = events.velocities[:, None] * events.velocities[None, :]
    denom = 2.0 * sigma * sigma
    norm = float(np.sum(w * np.exp(-(d * d) / denom)))
    lags = np.arange(cfg.min_lag, cfg.max_lag + 0.5, cfg.lag_step)
    best_lag, best_score = None, -1.0
    for lag in lags:
        ag = float(np.sum(w * np.exp(-((lag - d) ** 2) / denom)))
        score = ag / norm * math.exp(-2.0 * math.log2(lag / ts) ** 2)
        if score > best_score:
            best_lag, best_score = float(lag), score
    return best_lag


class TestTrimWindow:
    def test_drops_old_events_and_rebases(self):
        s = NoteEventSet([1000.0, 5000.0, 9000.0], [1.0, 1.0, 1.0])
        out = trim_window(s, 10000.0, 6000.0)
        assert list(out.onsets) == [1000.0, 5000.0]

    def test_left_edge_is_inclusive(self):
        s = NoteEventSet([4000.0, 9000.0], [0.5, 0.5])
        out = trim_window(s, 10000.0, 6000.0)
        assert list(out.onsets) == [0.0, 5000.0]

    def test_early_session_shifts_right(self):
        # With less history than the window, events float toward the right
        # edge: the window's origin lies before the session started.
        s = NoteEventSet([0.0, 400.0], [1.0, 1.0])
        out = trim_window(s, 1000.0, 6000.0)
        assert list(out.onsets) == [5000.0, 5400.0]

    def test_rejects_nonpositive_window(self):
        with pytest.raises(ValueError):
            trim_window(NoteEventSet([], []), 0.0, 0.0)


class TestEstimateBeat:
    def test_perfect_grid_at_spontaneous_tempo(self):
        onsets = np.arange(12, dtype=float) * 500.0
        s = NoteEventSet(onsets, np.ones(12))
        est = estimate_beat(s)
        assert est.beat == 500.0
        assert est.bpm == pytest.approx(120.0)
        # 11 of 12 self-alignments survive a one-beat shift.
        assert est.clarity == pytest.approx(11.0 / 12.0, rel=1e-6)

    def test_fast_grid_resolves_to_a_salient_level(self):
        onsets = np.arange(12, dtype=float) * 250.0
        s = NoteEventSet(onsets, np.ones(12))
        est = estimate_beat(s)
        assert est.beat in (250.0, 500.0)

    def test_requires_two_events(self):
        with pytest.raises(InsufficientData):
            estimate_beat(NoteEventSet([100.0], [1.0]))
        with pytest.raises(InsufficientData):
            estimate_beat(NoteEventSet([], []))

    def test_two_events_vote_for_their_gap(self):
        s = NoteEventSet([1000.0, 1600.0], [1.0, 1.0])
        est = estimate_beat(s)
        # The salience weighting pulls an isolated peak a few ms toward the
        # spontaneous tempo (sigma^2 times the salience log-slope).
        assert est.beat == pytest.approx(600.0, abs=5.0)
        assert 0.0 < est.clarity <= 1.0 + 1e-9

    def test_matches_independent_per_lag_search(self):
        rng = np.random.default_rng(101)
        cfg = TrackerConfig()
        for _ in range(20):
            n = int(rng.integers(2, 26))
            onsets = np.sort(rng.uniform(0.0, 6000.0, n))
            vels = rng.uniform(0.1, 1.0, n)
            s = NoteEventSet(onsets, vels)
            assert estimate_beat(s, cfg).beat == naive_beat_choice(s, cfg)

    def test_clarity_bounds_on_random_input(self):
        rng = np.random.default_rng(103)
        for _ in range(30):
            n = int(rng.integers(2, 30))
            s = NoteEventSet(
                np.sort(rng.uniform(0.0, 6000.0, n)), rng.uniform(0.1, 1.0, n)
            )
            est = estimate_beat(s)
            assert 0.0 <= est.clarity <= 1.0 + 1e-9
            assert est.bpm == pytest.approx(60000.0 / est.beat)

    def test_velocity_scale_leaves_choice_unchanged(self):
        rng = np.random.default_rng(107)
        onsets = np.sort(rng.uniform(0.0, 6000.0, 18))
        vels = rng.uniform(0.2, 1.0, 18)
        a = estimate_beat(NoteEventSet(onsets, vels))
        b = estimate_beat(NoteEventSet(onsets, 0.5 * vels))
        assert a.beat == b.beat
        assert a.clarity == pytest.approx(b.clarity, rel=1e-12)

    def test_coarser_lag_grid_is_honored(self):
        cfg = TrackerConfig(lag_step=10.0)
        onsets = np.arange(12, dtype=float) * 505.0
        est = estimate_beat(NoteEventSet(onsets, np.ones(12)), cfg)
        assert est.beat % 10.0 == 0.0
        assert est.beat == pytest.approx(505.0, abs=10.0)


class TestPrototype:
    @pytest.mark.parametrize("meter", [3, 4])
    @pytest.mark.parametrize("beat", [300.0, 500.0, 750.0])
    def test_shape_and_weight_budget(self, meter, beat):
        p = generate_prototype(meter, beat)
        assert len(p) == 9
        assert list(p.onsets) == [i * beat for i in range(9)]
        assert p.velocities.sum() == pytest.approx(3.6, abs=1e-12)
        assert all(
            v == (1.0 if i % meter == 0 else 0.1)
            for i, v in enumerate(p.velocities)
        )

    def test_rejects_unsupported_meter(self):
        with pytest.raises(UnsupportedMeter):
            generate_prototype(2, 500.0)
        with pytest.raises(UnsupportedMeter):
            generate_prototype(5, 500.0)

    def test_rejects_bad_beat(self):
        with pytest.raises(ValueError):
            generate_prototype(4, 0.0)
        with pytest.raises(ValueError):
            generate_prototype(4, -100.0)


class TestEstimateMeter:
    def test_recovers_planted_triple_prototype(self):
        proto = generate_prototype(3, 500.0)
        planted = NoteEventSet(proto.onsets + 700.0, proto.velocities)
        est = estimate_meter(planted, 500.0)
        assert est.meter == 3
        assert est.phase == pytest.approx(700.0, abs=1.0)

    def test_recovers_planted_quadruple_prototype(self):
        proto = generate_prototype(4, 500.0)
        planted = NoteEventSet(proto.onsets + 300.0, proto.velocities)
        est = estimate_meter(planted, 500.0)
        assert est.meter == 4
        assert est.phase == pytest.approx(300.0, abs=1.0)

    def test_tie_breaks_to_four(self):
        # A single event correlates identically with both prototypes'
        # downbeats, so the comparison is an exact tie.
        s = NoteEventSet([2000.0], [1.0])
        est = estimate_meter(s, 500.0)
        assert est.meter == 4

    def test_requires_an_event(self):
        with pytest.raises(InsufficientData):
            estimate_meter(NoteEventSet([], []), 500.0)

    def test_phase_stays_on_grid(self):
        cfg = TrackerConfig(phase_step=5.0)
        proto = generate_prototype(4, 500.0)
        planted = NoteEventSet(proto.onsets + 702.0, proto.velocities)
        est = estimate_meter(planted, 500.0, cfg)
        assert est.phase % 5.0 == 0.0
        assert est.phase == pytest.approx(702.0, abs=5.0)


class TestPredictNextMeasureOnset:
    def test_mid_measure(self):
        assert predict_next_measure_onset(10000.0, 6000.0, 200.0, 500.0, 4) == 10200.0

    def test_phase_at_window_edge(self):
        assert predict_next_measure_onset(10000.0, 6000.0, 6000.0, 500.0, 4) == 12000.0

    def test_triple_meter_alignment(self):
        assert predict_next_measure_onset(10000.0, 6000.0, 0.0, 500.0, 3) == 11500.0

    def test_range_property(self):
        rng = np.random.default_rng(109)
        for _ in range(2000):
            now = float(rng.uniform(0.0, 1e6))
            window = float(rng.uniform(2000.0, 8000.0))
            phase = float(rng.uniform(0.0, window))
            beat = float(rng.uniform(100.0, 2000.0))
            meter = int(rng.choice([3, 4]))
            onset = predict_next_measure_onset(now, window, phase, beat, meter)
            assert now < onset <= now + beat * meter + 1e-9


class TestAnalyze:
    def _performance(self, rng, start=0.0, beat=500.0, count=24):
        onsets = start + np.arange(count) * beat + rng.uniform(-5, 5, count)
        onsets = np.sort(onsets - onsets.min() + start)
        vels = rng.uniform(0.3, 1.0, count)
        return NoteEventSet(onsets, vels)

    def test_composes_all_fields(self):
        rng = np.random.default_rng(113)
        s = self._performance(rng)
        now = float(s.onsets[-1]) + 100.0
        est = analyze(s, now)
        assert est.analyzed_at == now
        assert est.measure == est.beat * est.meter
        assert est.meter in (3, 4)
        assert 0.0 <= est.phase < est.measure
        assert now < est.next_measure_onset <= now + est.measure
        assert est.note_count == len(trim_window(s, now, 6000.0))

    def test_is_pure_and_deterministic(self):
        rng = np.random.default_rng(127)
        s = self._performance(rng)
        now = float(s.onsets[-1])
        a = analyze(s, now)
        b = analyze(s, now)
        assert a == b  # dataclass equality: bit-identical floats

    def test_shift_covariance(self):
        # Shifting the whole performance and the clock by an integral delta
        # moves the prediction by exactly that delta.
        onsets = np.arange(0, 6000, 375, dtype=float)
        vels = np.tile([1.0, 0.4, 0.7, 0.4], 4)
        s = NoteEventSet(onsets, vels)
        now = 6000.0
        delta = 131072.0
        shifted = NoteEventSet(onsets + delta, vels)
        a = analyze(s, now)
        b = analyze(shifted, now + delta)
        assert b.beat == a.beat
        assert b.meter == a.meter
        assert b.phase == a.phase
        assert b.next_measure_onset == a.next_measure_onset + delta

    def test_insufficient_after_trim(self):
        s = NoteEventSet([0.0, 100.0, 200.0], [1.0, 1.0, 1.0])
        with pytest.raises(InsufficientData):
            analyze(s, 20000.0)

    def test_rejects_clock_before_newest_event(self):
        s = NoteEventSet([0.0, 500.0], [1.0, 1.0])
        with pytest.raises(ValueError):
            analyze(s, 400.0)

    def test_max_notes_truncates_oldest(self):
        cfg = TrackerConfig(max_notes=8)
        onsets = np.arange(20, dtype=float) * 250.0
        s = NoteEventSet(onsets, np.ones(20))
        est = analyze(s, float(onsets[-1]), cfg)
        assert est.note_count == 8

    def test_unlimited_when_max_notes_zero(self):
        cfg = TrackerConfig(max_notes=0)
        onsets = np.arange(0, 6000, 80, dtype=float)
        s = NoteEventSet(onsets, np.ones(onsets.size))
        est = analyze(s, 6000.0, cfg)
        assert est.note_count == onsets.size


class TestTrackerConfig:
    def test_rejects_inconsistent_grids(self):
        with pytest.raises(ValueError):
            TrackerConfig(min_lag=0.0)
        with pytest.raises(ValueError):
            TrackerConfig(min_lag=500.0, max_lag=100.0)
        with pytest.raises(ValueError):
            TrackerConfig(max_lag=7000.0)
        with pytest.raises(ValueError):
            TrackerConfig(lag_step=0.0)
        with pytest.raises(ValueError):
            TrackerConfig(max_notes=-1)
