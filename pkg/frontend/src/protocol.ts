// Wire records shared with the tracking service: one JSON object per
// WebSocket message. Field names and types mirror the service exactly;
// anything that does not is rejected here so the rest of the UI only
// ever sees well-formed records.

export type Meter = 3 | 4;

export interface EstimateRecord {
  type: "estimate";
  beat_ms: number;
  bpm: number;
  clarity: number;
  meter: Meter;
  phase_ms: number;
  next_measure_onset_ms: number;
  note_count: number;
  analyzed_at_ms: number;
  stale: boolean;
}

export interface StatusRecord {
  type: "status";
  state: string;
  note_count: number;
  at_ms: number;
}

export interface PongRecord {
  type: "pong";
  at_ms?: number; // service session clock at the echo
}

export type ServerRecord = EstimateRecord | StatusRecord | PongRecord;

export class ProtocolError extends Error {}

function requireNumber(obj: Record<string, unknown>, key: string): number {
  const value = obj[key];
  if (typeof value !== "number" || !Number.isFinite(value)) {
    throw new ProtocolError(`field ${key} must be a finite number`);
  }
  return value;
}

export function decodeServerRecord(line: string): ServerRecord {
  let parsed: unknown;
  try {
    parsed = JSON.parse(line);
  } catch {
    throw new ProtocolError("not valid JSON");
  }
  if (typeof parsed !== "object" || parsed === null || Array.isArray(parsed)) {
    throw new ProtocolError("record must be a JSON object");
  }
  const obj = parsed as Record<string, unknown>;
  switch (obj.type) {
    case "estimate": {
      for (const key of [
        "beat_ms",
        "bpm",
        "clarity",
        "phase_ms",
        "next_measure_onset_ms",
        "analyzed_at_ms",
      ]) {
        requireNumber(obj, key);
      }
      if (obj.meter !== 3 && obj.meter !== 4) {
        throw new ProtocolError("estimate meter must be 3 or 4");
      }
      if (typeof obj.note_count !== "number" || !Number.isInteger(obj.note_count)) {
        throw new ProtocolError("estimate note_count must be an integer");
      }
      if (typeof obj.stale !== "boolean") {
        throw new ProtocolError("estimate stale must be a boolean");
      }
      return obj as unknown as EstimateRecord;
    }
    case "status": {
      if (typeof obj.state !== "string") {
        throw new ProtocolError("status state must be a string");
      }
      return obj as unknown as StatusRecord;
    }
    case "pong": {
      if ("at_ms" in obj) requireNumber(obj, "at_ms");
      return obj as unknown as PongRecord;
    }
    default:
      throw new ProtocolError(`unexpected server record type: ${String(obj.type)}`);
  }
}

export function encodeNote(t: number, v: number): string {
  return JSON.stringify({ type: "note", t, v });
}

export function encodePing(): string {
  return JSON.stringify({ type: "ping" });
}

export function encodeAnalyze(now?: number): string {
  return now === undefined
    ? JSON.stringify({ type: "analyze" })
    : JSON.stringify({ type: "analyze", now });
}
