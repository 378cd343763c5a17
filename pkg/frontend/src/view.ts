// Pure mapping from protocol records to what the page shows. Keeping this
// free of DOM makes the replay test a plain data comparison.

import type { EstimateRecord, StatusRecord } from "./protocol.js";

export type ViewState =
  | { kind: "idle" }
  | { kind: "listening"; noteCount: number }
  | {
      kind: "estimate";
      bpmText: string;
      meterBadge: "3/4" | "4/4";
      clarityPct: number;
      phasePct: number;
      nextOnsetMs: number;
      noteCount: number;
      dimmed: boolean;
    }
  | { kind: "status"; text: string; noteCount: number }
  | { kind: "error"; message: string };

export function renderEstimate(record: EstimateRecord): ViewState {
  const measure = record.beat_ms * record.meter;
  const phasePct = Math.min(100, Math.max(0, (record.phase_ms / measure) * 100));
  return {
    kind: "estimate",
    bpmText: `${Math.round(record.bpm)} bpm`,
    meterBadge: record.meter === 3 ? "3/4" : "4/4",
    clarityPct: Math.round(record.clarity * 100),
    phasePct,
    nextOnsetMs: record.next_measure_onset_ms,
    noteCount: record.note_count,
    dimmed: record.stale,
  };
}

export function renderStatus(record: StatusRecord): ViewState {
  if (record.state === "insufficient-data") {
    return { kind: "listening", noteCount: record.note_count };
  }
  if (record.state.startsWith("error")) {
    return { kind: "error", message: record.state };
  }
  return { kind: "status", text: record.state, noteCount: record.note_count };
}

export function renderProtocolFailure(detail: string): ViewState {
  return { kind: "error", message: `bad record from service: ${detail}` };
}
