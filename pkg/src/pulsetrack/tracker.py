"""Windowed beat, meter and next-measure estimation.

The tracker answers one question about a stream of note events: given
everything heard in the recent window and a frozen clock reading, what is
the beat duration, is the grouping in 3 or in 4, where inside the window
does a measure start, and when does the next measure begin?

The pipeline is a straight composition of pure functions:

1.  ``trim_window`` keeps the recent events and rebases them so the window
    spans [0, window].
2.  ``estimate_beat`` scores every candidate lag on a 1 ms grid by the
    event autocorrelation, normalized by the zero-lag value and weighted
    by the pulse-period salience curve; the argmax is the beat.
3.  ``estimate_meter`` correlates the events against two synthetic accent
    prototypes (one in 3, one in 4) at every phase of the window; the
    prototype family with the higher peak wins, and its peak position is
    the phase of a measure start.
4.  ``predict_next_measure_onset`` folds window phase back onto the
    caller's clock.

Analysis is stateless and deterministic: the same events, clock reading
and config always produce the same estimate, bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from pulsetrack.kernels import (
    KernelConfig,
    NoteEventSet,
    autocorrelation,
    autocorrelation_grid,
    correlation_grid,
    parncutt_salience,
)

__all__ = [
    "InsufficientData",
    "UnsupportedMeter",
    "TrackerConfig",
    "BeatEstimate",
    "MeterEstimate",
    "RhythmEstimate",
    "trim_window",
    "estimate_beat",
    "generate_prototype",
    "estimate_meter",
    "predict_next_measure_onset",
    "analyze",
]

PROTOTYPE_LENGTH = 9  # beats covered by an accent prototype: two+ measures in 3 or 4
PROTOTYPE_WEAK = 0.1  # velocity of non-downbeat prototype points


class InsufficientData(Exception):
    """Fewer events than the analysis needs (two in the window)."""


class UnsupportedMeter(ValueError):
    """Meter outside the supported set {3, 4}."""


@dataclass(frozen=True)
class TrackerConfig:
    """Analysis window and search grids.

    window : how far back the analysis looks, ms.
    min_lag, max_lag : candidate beat durations searched, ms, inclusive.
    lag_step, phase_step : grid resolutions, ms.
    max_notes : newest events kept per analysis (0 = unlimited).
    """

    kernel: KernelConfig = field(default_factory=KernelConfig)
    window: float = 6000.0
    min_lag: float = 100.0
    max_lag: float = 2000.0
    lag_step: float = 1.0
    phase_step: float = 1.0
    max_notes: int = 60

    def __post_init__(self) -> None:
        if not (self.window > 0.0 and np.isfinite(self.window)):
            raise ValueError("window must be positive and finite")
        if not (0.0 < self.min_lag <= self.max_lag):
            raise ValueError("need 0 < min_lag <= max_lag")
        if self.max_lag > self.window:
            raise ValueError("max_lag cannot exceed the window")
        if self.lag_step <= 0.0 or self.phase_step <= 0.0:
            raise ValueError("grid steps must be positive")
        if self.max_notes < 0:
            raise ValueError("max_notes must be non-negative (0 = unlimited)")


@dataclass(frozen=True)
class BeatEstimate:
    """Beat duration in ms, the same tempo in bpm, and peak clarity in [0, 1]."""

    beat: float
    bpm: float
    clarity: float


@dataclass(frozen=True)
class MeterEstimate:
    """Beats per measure (3 or 4) and the window offset of a measure start."""

    meter: int
    phase: float


@dataclass(frozen=True)
class RhythmEstimate:
    """Composed analysis result for one frozen clock reading."""

    beat_estimate: BeatEstimate
    meter_estimate: MeterEstimate
    measure: float
    next_measure_onset: float
    note_count: int
    analyzed_at: float

    @property
    def beat(self) -> float:
        return self.beat_estimate.beat

    @property
    def bpm(self) -> float:
        return self.beat_estimate.bpm

    @property
    def clarity(self) -> float:
        return self.beat_estimate.clarity

    @property
    def meter(self) -> int:
        return self.meter_estimate.meter

    @property
    def phase(self) -> float:
        return self.meter_estimate.phase


def trim_window(events: NoteEventSet, current_time: float, window: float) -> NoteEventSet:
    """Keep events inside [current_time - window, current_time], rebased.

    An event exactly on the left edge survives.  Returned onsets are window
    coordinates: 0 is the left edge, ``window`` is now.
    """
    if window <= 0.0:
        raise ValueError("window must be positive")
    start = current_time - window
    keep = events.onsets >= start
    return NoteEventSet(events.onsets[keep] - start, events.velocities[keep])


def _lag_grid(cfg: TrackerConfig) -> np.ndarray:
    n = int(np.floor((cfg.max_lag - cfg.min_lag) / cfg.lag_step + 1e-9))
    return cfg.min_lag + np.arange(n + 1, dtype=np.float64) * cfg.lag_step


def _phase_grid(cfg: TrackerConfig) -> np.ndarray:
    n = int(np.floor(cfg.window / cfg.phase_step + 1e-9))
    return np.arange(n + 1, dtype=np.float64) * cfg.phase_step


def estimate_beat(events: NoteEventSet, cfg: TrackerConfig | None = None) -> BeatEstimate:
    """Pick the beat duration by salience-weighted autocorrelation.

    Every lag on the grid scores autocorrelation(lag) / autocorrelation(0)
    times the salience of that pulse period; the argmax wins (first grid
    point on ties).  Clarity is the unweighted normalized autocorrelation
    at the winning lag.  Raises InsufficientData with fewer than 2 events.
    """
    cfg = cfg or TrackerConfig()
    if len(events) < 2:
        raise InsufficientData(f"need at least 2 events, have {len(events)}")
    norm = autocorrelation(events, 0.0, cfg.kernel)
    lags = _lag_grid(cfg)
    ag = autocorrelation_grid(events, lags, cfg.kernel)
    scores = (ag / norm) * parncutt_salience(lags, cfg.kernel)
    k = int(np.argmax(scores))
    beat = float(lags[k])
    return BeatEstimate(beat=beat, bpm=60000.0 / beat, clarity=float(ag[k] / norm))


def generate_prototype(meter: int, beat: float) -> NoteEventSet:
    """Synthetic accent pattern: 9 beats, downbeat-accented every ``meter``.

    Points sit at i * beat for i = 0..8 with velocity 1.0 when i is a
    multiple of the meter and 0.1 otherwise, so a prototype in 3 and one
    in 4 carry the same total weight (3.6) and their correlation peaks
    are comparable.
    """
    if meter not in (3, 4):
        raise UnsupportedMeter(f"meter must be 3 or 4, got {meter!r}")
    if not (beat > 0.0 and np.isfinite(beat)):
        raise ValueError("beat must be positive and finite")
    onsets = np.arange(PROTOTYPE_LENGTH, dtype=np.float64) * beat
    velocities = np.where(
        np.arange(PROTOTYPE_LENGTH) % meter == 0, 1.0, PROTOTYPE_WEAK
    )
    return NoteEventSet(onsets, velocities)


def estimate_meter(
    events: NoteEventSet, beat: float, cfg: TrackerConfig | None = None
) -> MeterEstimate:
    """Choose 3 or 4 beats per measure and locate a measure start.

    Slides each meter's prototype across every phase of the window and
    compares the best alignments; ties go to 4.  The returned phase is the
    raw argmax of the winning curve, in window coordinates.
    """
    cfg = cfg or TrackerConfig()
    if not len(events):
        raise InsufficientData("need at least 1 event to phase a prototype")
    phases = _phase_grid(cfg)
    curves = {
        m: correlation_grid(
            events, generate_prototype(m, beat), phases, cfg.kernel, skip_negligible=True
        )
        for m in (3, 4)
    }
    meter = 3 if curves[3].max() > curves[4].max() else 4
    phase = float(phases[int(np.argmax(curves[meter]))])
    return MeterEstimate(meter=meter, phase=phase)


def predict_next_measure_onset(
    current_time: float, window: float, phase: float, beat: float, meter: int
) -> float:
    """Clock time of the next measure start.

    ``phase`` marks a measure start in window coordinates, so now sits
    (window - phase) ms past that start; fold by the measure duration and
    advance.  The result always lies in (current_time, current_time +
    beat * meter].
    """
    measure = beat * meter
    return current_time + measure - ((window - phase) % measure)


def analyze(
    events: NoteEventSet, current_time: float, cfg: TrackerConfig | None = None
) -> RhythmEstimate:
    """Full analysis of a stream snapshot at a frozen clock reading.

    Trims to the window, keeps the newest ``max_notes`` events, estimates
    beat then meter, and folds the winning phase modulo one measure so the
    published phase names the latest measure start inside the window.
    ``current_time`` must not precede the newest event.  Raises
    InsufficientData when fewer than 2 events survive trimming.
    """
    cfg = cfg or TrackerConfig()
    if len(events) and current_time < float(events.onsets[-1]):
        raise ValueError("current_time precedes the newest event")
    windowed = trim_window(events, current_time, cfg.window)
    if cfg.max_notes:
        windowed = windowed.tail(cfg.max_notes)
    beat_est = estimate_beat(windowed, cfg)
    raw = estimate_meter(windowed, beat_est.beat, cfg)
    measure = beat_est.beat * raw.meter
    meter_est = MeterEstimate(meter=raw.meter, phase=raw.phase % measure)
    onset = predict_next_measure_onset(
        current_time, cfg.window, meter_est.phase, beat_est.beat, raw.meter
    )
    return RhythmEstimate(
        beat_estimate=beat_est,
        meter_estimate=meter_est,
        measure=measure,
        next_measure_onset=onset,
        note_count=len(windowed),
        analyzed_at=current_time,
    )
