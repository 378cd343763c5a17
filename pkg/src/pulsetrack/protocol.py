"""Line-delimited record protocol shared by the stdio and socket endpoints.

One JSON object per line, UTF-8.  Inbound: note, analyze, ping.  Outbound:
estimate, status, pong.  Performance scripts serialize as note records
interleaved with truth records so a session file carries its own ground
truth; readers that only care about playback can skip the truth lines.
"""

from __future__ import annotations

import json
import math
from typing import IO

from .kernels import NoteEventSet
from .simulate import PerformanceScript, TruthRecord
from .tracker import RhythmEstimate

__all__ = [
    "INBOUND_TYPES",
    "OUTBOUND_TYPES",
    "ProtocolError",
    "encode_record",
    "decode_record",
    "note_record",
    "analyze_record",
    "estimate_record",
    "status_record",
    "truth_record",
    "write_script",
    "read_script",
]

INBOUND_TYPES = ("note", "analyze", "ping")
OUTBOUND_TYPES = ("estimate", "status", "pong")


class ProtocolError(ValueError):
    """Malformed line, unknown record type, or invalid field."""


def _require_number(record: dict, key: str, minimum: float | None = None) -> float:
    if key not in record:
        raise ProtocolError(f"{record.get('type', '?')} record missing {key!r}")
    value = record[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ProtocolError(f"field {key!r} must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ProtocolError(f"field {key!r} must be finite")
    if minimum is not None and value < minimum:
        raise ProtocolError(f"field {key!r} must be >= {minimum}")
    return value


def _validate(record: dict) -> dict:
    kind = record.get("type")
    if kind == "note":
        # t is optional on the wire: a session stamps arrival time.
        if "t" in record:
            _require_number(record, "t", minimum=0.0)
        v = _require_number(record, "v")
        if v <= 0.0:
            raise ProtocolError(f"note velocity must be positive, got {v}")
        # v > 1 passes validation; the session clamps it with a warning.
    elif kind == "analyze":
        # now is optional: a manual trigger may lean on the session clock.
        if "now" in record:
            _require_number(record, "now", minimum=0.0)
    elif kind == "estimate":
        for key in (
            "beat_ms",
            "bpm",
            "clarity",
            "phase_ms",
            "next_measure_onset_ms",
            "analyzed_at_ms",
        ):
            _require_number(record, key)
        if record.get("meter") not in (3, 4):
            raise ProtocolError("estimate meter must be 3 or 4")
        if not isinstance(record.get("note_count"), int):
            raise ProtocolError("estimate note_count must be an integer")
        if not isinstance(record.get("stale"), bool):
            raise ProtocolError("estimate stale must be a boolean")
    elif kind == "status":
        if not isinstance(record.get("state"), str):
            raise ProtocolError("status state must be a string")
    elif kind == "truth":
        _require_number(record, "t", minimum=0.0)
        _require_number(record, "beat", minimum=0.0)
        if record.get("meter") not in (3, 4):
            raise ProtocolError("truth meter must be 3 or 4")
        if not isinstance(record.get("measure_onset"), bool):
            raise ProtocolError("truth measure_onset must be a boolean")
    elif kind == "ping":
        pass
    elif kind == "pong":
        # at_ms (optional) echoes the service clock for client offset sync.
        if "at_ms" in record:
            _require_number(record, "at_ms", minimum=0.0)
    else:
        raise ProtocolError(f"unknown record type: {kind!r}")
    return record


def encode_record(record: dict) -> str:
    """One validated record as a JSON line (no trailing newline)."""
    _validate(record)
    return json.dumps(record, sort_keys=True)


def decode_record(line: str) -> dict:
    line = line.strip()
    if not line:
        raise ProtocolError("empty line")
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"not valid JSON: {exc}") from exc
    if not isinstance(record, dict):
        raise ProtocolError("record must be a JSON object")
    return _validate(record)


def note_record(t: float, v: float) -> dict:
    return _validate({"type": "note", "t": float(t), "v": float(v)})


def analyze_record(now: float) -> dict:
    return _validate({"type": "analyze", "now": float(now)})


def estimate_record(estimate: RhythmEstimate, stale: bool) -> dict:
    return _validate(
        {
            "type": "estimate",
            "beat_ms": estimate.beat,
            "bpm": estimate.bpm,
            "clarity": estimate.clarity,
            "meter": estimate.meter,
            "phase_ms": estimate.phase,
            "next_measure_onset_ms": estimate.next_measure_onset,
            "note_count": estimate.note_count,
            "analyzed_at_ms": estimate.analyzed_at,
            "stale": stale,
        }
    )


def status_record(state: str, note_count: int, at: float) -> dict:
    return _validate(
        {
            "type": "status",
            "state": state,
            "note_count": int(note_count),
            "at_ms": float(at),
        }
    )


def truth_record(rec: TruthRecord) -> dict:
    return _validate(
        {
            "type": "truth",
            "t": rec.time,
            "beat": rec.beat,
            "meter": rec.meter,
            "measure_onset": rec.is_measure_onset,
        }
    )


def write_script(script: PerformanceScript, stream: IO[str]) -> None:
    """Notes and truth merged by time; notes first on exact ties."""
    notes = [
        note_record(t, v)
        for t, v in zip(script.events.onsets, script.events.velocities)
    ]
    truths = [truth_record(r) for r in script.truth]
    i = j = 0
    while i < len(notes) or j < len(truths):
        if j >= len(truths) or (i < len(notes) and notes[i]["t"] <= truths[j]["t"]):
            stream.write(encode_record(notes[i]) + "\n")
            i += 1
        else:
            stream.write(encode_record(truths[j]) + "\n")
            j += 1


def read_script(stream: IO[str]) -> PerformanceScript:
    onsets: list[float] = []
    velocities: list[float] = []
    truth: list[TruthRecord] = []
    for line in stream:
        if not line.strip():
            continue
        record = decode_record(line)
        if record["type"] == "note":
            onsets.append(record["t"])
            velocities.append(record["v"])
        elif record["type"] == "truth":
            truth.append(
                TruthRecord(
                    time=record["t"],
                    beat=record["beat"],
                    meter=record["meter"],
                    is_measure_onset=record["measure_onset"],
                )
            )
        else:
            raise ProtocolError(
                f"unexpected record in script file: {record['type']!r}"
            )
    return PerformanceScript(NoteEventSet(onsets, velocities), truth)
