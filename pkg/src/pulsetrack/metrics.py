"""Scoring of rhythm estimates against a known performance.

A simulated performance carries its own ground truth, so a tracker run over
the event stream can be graded estimate by estimate: tempo accuracy with
octave forgiveness, meter accuracy, and precision/recall of the predicted
measure onsets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import NoteEventSet
from .simulate import PerformanceScript
from .tracker import InsufficientData, RhythmEstimate, TrackerConfig, analyze

TEMPO_TOLERANCE = 10.0
ONSET_TOLERANCE = 50.0
OCTAVE_SCORE = 75.0


def tempo_score(estimated_beat: float, true_beat: float) -> float:
    """100 for a match within 10 ms, 75 for half or double, else 0."""
    if estimated_beat <= 0.0 or true_beat <= 0.0:
        raise ValueError("beat durations must be positive")
    if abs(estimated_beat - true_beat) <= TEMPO_TOLERANCE:
        return 100.0
    if abs(estimated_beat - true_beat / 2.0) <= TEMPO_TOLERANCE:
        return OCTAVE_SCORE
    if abs(estimated_beat - 2.0 * true_beat) <= TEMPO_TOLERANCE:
        return OCTAVE_SCORE
    return 0.0


@dataclass(frozen=True)
class TraceEntry:
    """One graded estimate: what the tracker said and what was true then."""

    estimate: RhythmEstimate
    true_beat: float
    true_meter: int
    at: float


@dataclass(frozen=True)
class EstimateTrace:
    entries: tuple[TraceEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def trace_script(
    script: PerformanceScript, config: TrackerConfig | None = None
) -> EstimateTrace:
    """Run the tracker after every note of a performance.

    Each event triggers one analysis with the clock at that event's onset.
    Warm-up analyses that raise InsufficientData produce no entry.
    """
    if config is None:
        config = TrackerConfig()
    onsets = script.events.onsets
    velocities = script.events.velocities
    entries = []
    for n in range(1, len(onsets) + 1):
        prefix = NoteEventSet(onsets[:n], velocities[:n])
        now = float(onsets[n - 1])
        try:
            estimate = analyze(prefix, now, config)
        except InsufficientData:
            continue
        truth = script.truth_at(now)
        entries.append(
            TraceEntry(
                estimate=estimate,
                true_beat=truth.beat,
                true_meter=truth.meter,
                at=now,
            )
        )
    return EstimateTrace(tuple(entries))


def trace_tempo_accuracy(trace: EstimateTrace) -> float:
    if not len(trace):
        raise ValueError("cannot score an empty trace")
    return float(np.mean([tempo_score(e.estimate.beat, e.true_beat) for e in trace]))


def meter_accuracy(trace: EstimateTrace) -> float:
    if not len(trace):
        raise ValueError("cannot score an empty trace")
    correct = sum(1 for e in trace if e.estimate.meter == e.true_meter)
    return 100.0 * correct / len(trace)


def onset_precision_recall(
    predicted_onsets, true_onsets, tolerance: float = ONSET_TOLERANCE
) -> tuple[float, float]:
    """Two independent ratios, not a one-to-one matching.

    Precision: share of predictions landing within `tolerance` of any true
    measure onset.  Recall: share of true onsets (excluding the first, which
    is impossible to forecast) hit by at least one prediction.
    """
    predicted = np.asarray(predicted_onsets, dtype=np.float64)
    truth = np.asarray(true_onsets, dtype=np.float64)
    if predicted.size == 0:
        raise ValueError("precision is undefined without predictions")
    if truth.size < 2:
        raise ValueError("recall is undefined with fewer than two true onsets")
    gap = np.abs(predicted[:, None] - truth[None, :])
    precision = 100.0 * float(np.mean(gap.min(axis=1) <= tolerance))
    recall = 100.0 * float(np.mean(gap[:, 1:].min(axis=0) <= tolerance))
    return precision, recall


@dataclass(frozen=True)
class TrialMetrics:
    """The four scores of one simulated performance."""

    t_ac: float
    m_ac: float
    precision: float
    recall: float

    def as_dict(self) -> dict:
        return {
            "t_ac": self.t_ac,
            "m_ac": self.m_ac,
            "precision": self.precision,
            "recall": self.recall,
        }


def score_trial(
    script: PerformanceScript, config: TrackerConfig | None = None
) -> TrialMetrics:
    trace = trace_script(script, config)
    predictions = [e.estimate.next_measure_onset for e in trace]
    precision, recall = onset_precision_recall(predictions, script.measure_onsets())
    return TrialMetrics(
        t_ac=trace_tempo_accuracy(trace),
        m_ac=meter_accuracy(trace),
        precision=precision,
        recall=recall,
    )


@dataclass(frozen=True)
class MetricsSummary:
    """Mean and standard deviation of each metric across trials."""

    t_ac: float
    t_ac_sd: float
    m_ac: float
    m_ac_sd: float
    precision: float
    precision_sd: float
    recall: float
    recall_sd: float
    trials: int

    def as_dict(self) -> dict:
        return {
            "t_ac": self.t_ac,
            "t_ac_sd": self.t_ac_sd,
            "m_ac": self.m_ac,
            "m_ac_sd": self.m_ac_sd,
            "precision": self.precision,
            "precision_sd": self.precision_sd,
            "recall": self.recall,
            "recall_sd": self.recall_sd,
            "trials": self.trials,
        }


def summarize(trials: list[TrialMetrics]) -> MetricsSummary:
    if not trials:
        raise ValueError("cannot summarize zero trials")
    cols = {
        name: np.array([getattr(t, name) for t in trials])
        for name in ("t_ac", "m_ac", "precision", "recall")
    }
    return MetricsSummary(
        t_ac=float(cols["t_ac"].mean()),
        t_ac_sd=float(cols["t_ac"].std()),
        m_ac=float(cols["m_ac"].mean()),
        m_ac_sd=float(cols["m_ac"].std()),
        precision=float(cols["precision"].mean()),
        precision_sd=float(cols["precision"].std()),
        recall=float(cols["recall"].mean()),
        recall_sd=float(cols["recall"].std()),
        trials=len(trials),
    )


def adaptation_time(
    trace: EstimateTrace,
    change_at: float,
    new_beat: float,
    new_meter: int,
    kind: str,
    required: int = 10,
    horizon: float | None = None,
) -> float | None:
    """Time from a setting change to its tenth correct estimate.

    Correct means tempo_score == 100 against the new beat for a tempo
    change, or an exact meter match for a meter change; the hits need not
    be consecutive.  Returns None when fewer than `required` hits arrive
    before the trace (or the explicit horizon) runs out.
    """
    if kind not in ("sudden_tempo", "sudden_meter"):
        raise ValueError(f"unknown change kind: {kind!r}")
    hits = 0
    for entry in trace:
        if entry.at < change_at:
            continue
        if horizon is not None and entry.at > horizon:
            break
        if kind == "sudden_tempo":
            ok = tempo_score(entry.estimate.beat, new_beat) == 100.0
        else:
            ok = entry.estimate.meter == new_meter
        if ok:
            hits += 1
            if hits == required:
                return entry.at - change_at
    return None
