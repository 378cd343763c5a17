import { describe, expect, it } from "vitest";

import {
  ProtocolError,
  decodeServerRecord,
  encodeAnalyze,
  encodeNote,
  encodePing,
} from "../src/protocol.js";

// Strings below are verbatim service output; the decoder must take them
// exactly as they come off the wire.

describe("decodeServerRecord", () => {
  it("accepts a service estimate line", () => {
    const record = decodeServerRecord(
      '{"analyzed_at_ms": 500.0, "beat_ms": 493.0, "bpm": 121.70385395537525,' +
        ' "clarity": 0.38759496110026315, "meter": 4, "next_measure_onset_ms": 1979.0,' +
        ' "note_count": 3, "phase_ms": 1563.0, "stale": false, "type": "estimate"}',
    );
    expect(record.type).toBe("estimate");
    if (record.type === "estimate") {
      expect(record.beat_ms).toBe(493.0);
      expect(record.meter).toBe(4);
      expect(record.stale).toBe(false);
    }
  });

  it("accepts status and pong lines", () => {
    const status = decodeServerRecord(
      '{"type": "status", "state": "insufficient-data", "note_count": 1, "at_ms": 250.0}',
    );
    expect(status.type).toBe("status");
    const pong = decodeServerRecord('{"type": "pong", "at_ms": 12.0}');
    expect(pong.type).toBe("pong");
    if (pong.type === "pong") expect(pong.at_ms).toBe(12.0);
  });

  it("rejects records the service would never send", () => {
    expect(() => decodeServerRecord('{"type": "note", "t": 1, "v": 1}')).toThrow(
      ProtocolError,
    );
    expect(() => decodeServerRecord("not json")).toThrow(ProtocolError);
    expect(() => decodeServerRecord("[1, 2]")).toThrow(ProtocolError);
  });

  it("rejects schema drift inside an estimate", () => {
    const missingClarity =
      '{"analyzed_at_ms": 1, "beat_ms": 500, "bpm": 120, "meter": 4,' +
      ' "next_measure_onset_ms": 2, "note_count": 3, "phase_ms": 0,' +
      ' "stale": false, "type": "estimate"}';
    expect(() => decodeServerRecord(missingClarity)).toThrow(ProtocolError);
    const badMeter = missingClarity.replace('"meter": 4', '"meter": 5');
    expect(() => decodeServerRecord(badMeter)).toThrow(ProtocolError);
  });
});

describe("encoders", () => {
  it("note and ping match the wire schema", () => {
    expect(JSON.parse(encodeNote(123.5, 0.5))).toEqual({
      type: "note",
      t: 123.5,
      v: 0.5,
    });
    expect(encodePing()).toBe('{"type":"ping"}');
  });

  it("analyze omits now when the session clock should decide", () => {
    expect(encodeAnalyze()).toBe('{"type":"analyze"}');
    expect(JSON.parse(encodeAnalyze(4100))).toEqual({ type: "analyze", now: 4100 });
  });
});
