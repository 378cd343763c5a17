"""Synthetic performances on a sixteenth-note grid.

A virtual player walks a grid of sixteenth notes.  Each grid position has
an importance weight from an accent table; the player sounds the position
with probability equal to that weight, at a velocity equal to that weight,
and with Gaussian timing error around the grid instant.  A change schedule
can alter tempo or meter mid-performance, either suddenly at a measure
start or ramped across one measure.

Alongside the events, the simulator records a ground-truth timeline: the
effective beat and meter at every emitted note, plus every true measure
start at its unperturbed grid time.  The evaluation harness reads the
truth; the tracker only ever sees the events.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from pulsetrack.kernels import NoteEventSet

__all__ = [
    "AccentTable",
    "DEFAULT_ACCENTS_44",
    "DEFAULT_ACCENTS_34",
    "ChangeSchedule",
    "SimulationConfig",
    "StepSetting",
    "TruthRecord",
    "PerformanceScript",
    "apply_schedule",
    "generate",
]

SIXTEENTHS_PER_BEAT = 4


@dataclass(frozen=True)
class AccentTable:
    """Importance weight per sixteenth position of one measure.

    16 weights describe a measure in 4, 12 a measure in 3.  Weights are
    probabilities and velocities at once, so they live in [0, 1]; the
    downbeat must carry the maximum weight.  Tables that do not weigh beat
    positions (multiples of 4) above the off-beat positions only get a
    warning: flat tables are legitimate for stress tests.
    """

    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        w = tuple(float(x) for x in self.weights)
        object.__setattr__(self, "weights", w)
        if len(w) not in (12, 16):
            raise ValueError("accent table needs 12 or 16 weights")
        if any(not (0.0 <= x <= 1.0) for x in w):
            raise ValueError("accent weights must lie in [0, 1]")
        if w[0] <= 0.0:
            raise ValueError("the downbeat weight must be positive")
        if w[0] < max(w):
            raise ValueError("the downbeat must carry the maximum weight")
        beats = w[::SIXTEENTHS_PER_BEAT]
        offbeats = [x for i, x in enumerate(w) if i % SIXTEENTHS_PER_BEAT]
        if offbeats and min(beats) <= max(offbeats):
            warnings.warn(
                "accent table does not weigh beat positions above off-beats",
                stacklevel=2,
            )

    @property
    def meter(self) -> int:
        return len(self.weights) // SIXTEENTHS_PER_BEAT


with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    # Downbeat strongest, beat 3 (and beat 2 of three) next, off-beats faint.
    DEFAULT_ACCENTS_44 = AccentTable(
        (1.0, 0.1, 0.2, 0.1, 0.5, 0.1, 0.2, 0.1, 0.7, 0.1, 0.2, 0.1, 0.5, 0.1, 0.2, 0.1)
    )
    DEFAULT_ACCENTS_34 = AccentTable(
        (1.0, 0.1, 0.2, 0.1, 0.5, 0.1, 0.2, 0.1, 0.5, 0.1, 0.2, 0.1)
    )


@dataclass(frozen=True)
class ChangeSchedule:
    """What changes mid-performance, and when.

    kind : "none", "sudden_tempo", "sudden_meter" or "tempo_ramp".
    after_measures : unchanged measures before the change takes effect at
        the following measure's first sixteenth.
    new_beat / new_meter : targets for the sudden kinds.
    increment : signed ms added to the beat at every sixteenth of the ramp
        measure; magnitude 1..5.
    """

    kind: str = "none"
    after_measures: int = 5
    new_beat: float | None = None
    new_meter: int | None = None
    increment: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("none", "sudden_tempo", "sudden_meter", "tempo_ramp"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.after_measures < 1:
            raise ValueError("after_measures must be at least 1")
        if self.kind == "sudden_tempo":
            if self.new_beat is None or not self.new_beat > 0.0:
                raise ValueError("sudden_tempo needs a positive new_beat")
        if self.kind == "sudden_meter":
            if self.new_meter not in (3, 4):
                raise ValueError("sudden_meter needs new_meter of 3 or 4")
        if self.kind == "tempo_ramp":
            if self.increment is None or not 1.0 <= abs(self.increment) <= 5.0:
                raise ValueError("tempo_ramp needs |increment| in [1, 5] ms")


@dataclass(frozen=True)
class SimulationConfig:
    """One synthetic performance: tempo, meter, error level, length, changes.

    ``beat`` is the quarter-note duration in ms; the grid advances by a
    quarter of it per step.  ``steps`` counts sixteenth positions (160 =
    ten measures in 4).  ``sigma_err`` is the SD of the timing error in ms.
    """

    beat: float = 500.0
    meter: int = 4
    sigma_err: float = 0.0
    steps: int = 160
    accent_table: AccentTable | None = None
    schedule: ChangeSchedule | None = None
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if not (self.beat > 0.0 and np.isfinite(self.beat)):
            raise ValueError("beat must be positive and finite")
        if self.meter not in (3, 4):
            raise ValueError("meter must be 3 or 4")
        if self.sigma_err < 0.0:
            raise ValueError("sigma_err must be non-negative")
        if self.steps < 1:
            raise ValueError("steps must be at least 1")


@dataclass(frozen=True)
class StepSetting:
    """Effective tempo and grouping at one sixteenth-note grid step."""

    beat: float
    meter: int
    position: int  # sixteenth index within the measure, 0 = downbeat
    measure: int  # 0-based measure counter


@dataclass(frozen=True)
class TruthRecord:
    """Ground truth at one instant: what the simulator was really playing."""

    time: float
    beat: float
    meter: int
    is_measure_onset: bool


class PerformanceScript:
    """Events as a tracker would hear them, plus the ground-truth timeline."""

    __slots__ = ("events", "truth", "_truth_times")

    def __init__(self, events: NoteEventSet, truth) -> None:
        self.events = events
        self.truth = tuple(truth)
        times = np.array([r.time for r in self.truth], dtype=np.float64)
        if times.size and np.any(np.diff(times) < 0.0):
            raise ValueError("truth timeline must be time-ordered")
        self._truth_times = times

    def truth_at(self, t: float) -> TruthRecord:
        """The latest truth record at or before ``t`` (the first, if none)."""
        if not self.truth:
            raise ValueError("script has no truth records")
        idx = int(np.searchsorted(self._truth_times, t, side="right")) - 1
        return self.truth[max(idx, 0)]

    def measure_onsets(self) -> np.ndarray:
        """Unperturbed times of every true measure start."""
        return np.array(
            [r.time for r in self.truth if r.is_measure_onset], dtype=np.float64
        )

    def span(self) -> float:
        """Time of the last recorded instant (event or truth)."""
        last = 0.0
        if self._truth_times.size:
            last = float(self._truth_times[-1])
        if len(self.events):
            last = max(last, float(self.events.onsets[-1]))
        return last

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PerformanceScript):
            return NotImplemented
        return self.events == other.events and self.truth == other.truth

    def __repr__(self) -> str:
        return (
            f"PerformanceScript({len(self.events)} events, "
            f"{len(self.truth)} truth records)"
        )


def _table_for(cfg: SimulationConfig, meter: int) -> AccentTable:
    if cfg.accent_table is not None and cfg.accent_table.meter == meter:
        return cfg.accent_table
    return DEFAULT_ACCENTS_44 if meter == 4 else DEFAULT_ACCENTS_34


def apply_schedule(cfg: SimulationConfig) -> list[StepSetting]:
    """Per-step effective (beat, meter) with the config's schedule applied.

    Sudden changes land on the first sixteenth after ``after_measures``
    complete measures.  A ramp adds its increment at each sixteenth of that
    measure — the final tempo, reached on the measure's last sixteenth and
    held afterwards, is the start value plus 16 times the increment (12 in
    three).
    """
    schedule = cfg.schedule or ChangeSchedule()
    beat = cfg.beat
    meter = cfg.meter
    plan: list[StepSetting] = []
    position = 0
    measure = 0
    ramp_left = 0
    for _ in range(cfg.steps):
        if (
            schedule.kind != "none"
            and position == 0
            and measure == schedule.after_measures
        ):
            if schedule.kind == "sudden_tempo":
                beat = float(schedule.new_beat)
            elif schedule.kind == "sudden_meter":
                meter = int(schedule.new_meter)
            elif schedule.kind == "tempo_ramp":
                ramp_left = SIXTEENTHS_PER_BEAT * meter
        if ramp_left > 0:
            beat += float(schedule.increment)
            ramp_left -= 1
        plan.append(StepSetting(beat=beat, meter=meter, position=position, measure=measure))
        position += 1
        if position >= SIXTEENTHS_PER_BEAT * meter:
            position = 0
            measure += 1
    return plan


def generate(cfg: SimulationConfig) -> PerformanceScript:
    """Play the grid once and return events plus ground truth.

    Per step: sound the position iff a uniform draw falls below its accent
    weight; the velocity is the weight itself and the onset is the grid
    instant plus scaled unit-normal error (clamped at zero, re-sorted).
    The unit normal is drawn whenever a note sounds, so two configs that
    differ only in ``sigma_err`` perturb the same underlying performance.
    """
    rng = np.random.default_rng(cfg.rng_seed)
    plan = apply_schedule(cfg)
    onsets: list[float] = []
    velocities: list[float] = []
    truth: list[TruthRecord] = []
    time = 0.0
    for step in plan:
        weight = _table_for(cfg, step.meter).weights[step.position]
        if step.position == 0:
            truth.append(
                TruthRecord(time=time, beat=step.beat, meter=step.meter, is_measure_onset=True)
            )
        if rng.random() < weight:
            jitter = rng.standard_normal() * cfg.sigma_err
            onset = max(time + jitter, 0.0)
            onsets.append(onset)
            velocities.append(weight)
            truth.append(
                TruthRecord(time=onset, beat=step.beat, meter=step.meter, is_measure_onset=False)
            )
        time += step.beat / SIXTEENTHS_PER_BEAT
    events = NoteEventSet.from_raw(onsets, velocities)
    truth.sort(key=lambda r: r.time)
    return PerformanceScript(events=events, truth=truth)
