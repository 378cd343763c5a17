"""Streaming session: O(1) ingestion, frozen-clock analysis, live serving.

The contract that keeps estimates valid under real-time load: ingestion
appends under a short lock and returns immediately; analysis copies a
snapshot plus one clock reading and never looks at the clock again, so
time passing during the computation cannot change the result.  The caller
checks afterwards whether the predicted onset is already in the past
(stale) at publication time.
"""

from __future__ import annotations

import asyncio
import threading
import time
import warnings
from dataclasses import dataclass

from .kernels import VELOCITY_FLOOR, NoteEventSet
from .protocol import (
    ProtocolError,
    decode_record,
    encode_record,
    estimate_record,
    status_record,
)
from .simulate import PerformanceScript
from .tracker import InsufficientData, TrackerConfig, analyze

__all__ = [
    "MonotonicClock",
    "Snapshot",
    "StreamSession",
    "replay",
    "serve_forever",
]

# Keep already-heard events a little past the window edge so a late
# straggler cannot land ahead of a pruned neighbor.
PRUNE_MARGIN = 2000.0


class MonotonicClock:
    """Session clock in milliseconds, zeroed at construction."""

    def __init__(self) -> None:
        self._t0 = time.monotonic()

    def now(self) -> float:
        return (time.monotonic() - self._t0) * 1000.0


@dataclass(frozen=True)
class Snapshot:
    events: NoteEventSet
    now: float


class StreamSession:
    """One rhythm-tracking conversation.

    Thread-safe: ingest may race with tick.  The event buffer lock is held
    only for appends and copies; the analysis itself runs outside it.  tick
    is single-flight: a second caller while one analysis runs gets None
    instead of queueing a concurrent computation.
    """

    def __init__(self, config: TrackerConfig | None = None, clock=None) -> None:
        self.config = config or TrackerConfig()
        self.clock = clock or MonotonicClock()
        self._buffer_lock = threading.Lock()
        self._tick_lock = threading.Lock()
        self._onsets: list[float] = []
        self._velocities: list[float] = []
        self._heard = 0

    def ingest(self, t: float | None, v: float) -> dict:
        """Append one note and acknowledge; constant-time under the lock.

        A missing onset is stamped with the session clock.  Velocities
        outside [1/127, 1] are clamped with a warning, mirroring the
        untrusted-input path of NoteEventSet.from_raw.
        """
        if t is None:
            t = self.clock.now()
        t = float(t)
        v = float(v)
        if not VELOCITY_FLOOR <= v <= 1.0:
            warnings.warn(
                f"note velocity {v} clamped to [1/127, 1]", stacklevel=2
            )
            v = min(max(v, VELOCITY_FLOOR), 1.0)
        with self._buffer_lock:
            self._onsets.append(t)
            self._velocities.append(v)
            self._heard += 1
            count = self._heard
        return status_record("ok", count, t)

    @property
    def note_count(self) -> int:
        with self._buffer_lock:
            return len(self._onsets)

    def _prune(self, cutoff: float) -> None:
        # The buffer is near-sorted (live notes arrive roughly in order),
        # so dropping the stale prefix is enough; stragglers behind a
        # survivor get caught on a later pass.
        drop = 0
        while drop < len(self._onsets) and self._onsets[drop] < cutoff:
            drop += 1
        if drop:
            del self._onsets[:drop]
            del self._velocities[:drop]

    def snapshot(self, now: float | None = None) -> Snapshot:
        """Frozen copy of the buffer and one clock reading.

        Notes stamped after `now` (clock skew from a remote client) are
        left for the next tick so the analysis never sees its own future.
        """
        if now is None:
            now = self.clock.now()
        with self._buffer_lock:
            self._prune(now - self.config.window - PRUNE_MARGIN)
            pairs = [
                (t, v)
                for t, v in zip(self._onsets, self._velocities)
                if t <= now
            ]
        pairs.sort()
        events = NoteEventSet([p[0] for p in pairs], [p[1] for p in pairs])
        return Snapshot(events=events, now=float(now))

    def tick(self, now: float | None = None) -> dict | None:
        """Analyze a frozen snapshot; None if an analysis is already running."""
        if not self._tick_lock.acquire(blocking=False):
            return None
        try:
            snap = self.snapshot(now)
            try:
                estimate = analyze(snap.events, snap.now, self.config)
            except InsufficientData:
                return status_record(
                    "insufficient-data", len(snap.events), snap.now
                )
            stale = estimate.next_measure_onset < self.clock.now()
            return estimate_record(estimate, stale)
        finally:
            self._tick_lock.release()

    def handle_record(self, record: dict) -> dict | None:
        kind = record["type"]
        if kind == "note":
            return self.ingest(record.get("t"), record["v"])
        if kind == "analyze":
            return self.tick(record.get("now"))
        if kind == "ping":
            # The echoed clock reading lets a remote client estimate its
            # offset to the session clock from half the round trip.
            return {"type": "pong", "at_ms": self.clock.now()}
        raise ProtocolError(f"inbound record type not handled: {kind!r}")


def replay(
    script: PerformanceScript,
    cadence: float = 500.0,
    config: TrackerConfig | None = None,
) -> list[dict]:
    """Offline deterministic session: analyze every `cadence` ms of a script.

    Warm-up ticks (fewer than two notes in the window) produce no record.
    """
    if cadence <= 0.0:
        raise ValueError("cadence must be positive")
    config = config or TrackerConfig()
    onsets = script.events.onsets
    velocities = script.events.velocities
    records = []
    ticks = int(script.span() / cadence)
    for k in range(1, ticks + 1):
        now = k * cadence
        n = int((onsets <= now).sum())
        try:
            estimate = analyze(
                NoteEventSet(onsets[:n], velocities[:n]), now, config
            )
        except InsufficientData:
            continue
        records.append(estimate_record(estimate, stale=False))
    return records


async def _serve_connection(websocket, config: TrackerConfig, cadence: float):
    session = StreamSession(config=config)

    async def metronome():
        while True:
            await asyncio.sleep(cadence / 1000.0)
            reply = await asyncio.to_thread(session.tick)
            if reply is not None:
                await websocket.send(encode_record(reply))

    ticker = asyncio.create_task(metronome()) if cadence > 0 else None
    try:
        async for message in websocket:
            try:
                record = decode_record(message)
                if record["type"] not in ("note", "analyze", "ping"):
                    raise ProtocolError(
                        f"client may not send {record['type']!r}"
                    )
                reply = session.handle_record(record)
            except ProtocolError as exc:
                await websocket.send(
                    encode_record(status_record(f"error: {exc}", 0, 0.0))
                )
                continue
            if reply is not None:
                await websocket.send(encode_record(reply))
    finally:
        if ticker is not None:
            ticker.cancel()


async def serve_forever(
    host: str = "127.0.0.1",
    port: int = 8765,
    config: TrackerConfig | None = None,
    cadence: float = 500.0,
    ready: asyncio.Event | None = None,
) -> None:
    """WebSocket endpoint: one session per connection, JSON records per
    message, plus a metronome that analyzes every `cadence` ms."""
    from websockets.asyncio.server import serve

    config = config or TrackerConfig()

    async def handler(websocket):
        await _serve_connection(websocket, config, cadence)

    async with serve(handler, host, port):
        if ready is not None:
            ready.set()
        await asyncio.Future()
