"""Real-time beat, meter and next-measure tracking from note onsets."""

from pulsetrack.kernels import (
    KernelConfig,
    NoteEventSet,
    autocorrelation,
    autocorrelation_grid,
    correlation,
    correlation_grid,
    gaussify_eval,
    parncutt_salience,
)
from pulsetrack.metrics import (
    EstimateTrace,
    MetricsSummary,
    TrialMetrics,
    adaptation_time,
    meter_accuracy,
    onset_precision_recall,
    score_trial,
    summarize,
    tempo_score,
    trace_script,
)
from pulsetrack.service import MonotonicClock, StreamSession, replay, serve_forever
from pulsetrack.simulate import (
    AccentTable,
    ChangeSchedule,
    PerformanceScript,
    SimulationConfig,
    generate,
)
from pulsetrack.tracker import (
    BeatEstimate,
    InsufficientData,
    MeterEstimate,
    RhythmEstimate,
    TrackerConfig,
    analyze,
    estimate_beat,
    estimate_meter,
    generate_prototype,
    predict_next_measure_onset,
    trim_window,
)

__version__ = "0.1.0"

__all__ = [
    "AccentTable",
    "BeatEstimate",
    "ChangeSchedule",
    "EstimateTrace",
    "InsufficientData",
    "KernelConfig",
    "MeterEstimate",
    "MetricsSummary",
    "MonotonicClock",
    "NoteEventSet",
    "PerformanceScript",
    "RhythmEstimate",
    "SimulationConfig",
    "StreamSession",
    "TrackerConfig",
    "TrialMetrics",
    "adaptation_time",
    "analyze",
    "autocorrelation",
    "autocorrelation_grid",
    "correlation",
    "correlation_grid",
    "estimate_beat",
    "estimate_meter",
    "gaussify_eval",
    "generate",
    "generate_prototype",
    "meter_accuracy",
    "onset_precision_recall",
    "parncutt_salience",
    "predict_next_measure_onset",
    "replay",
    "score_trial",
    "serve_forever",
    "summarize",
    "tempo_score",
    "trace_script",
    "trim_window",
    "__version__",
]
