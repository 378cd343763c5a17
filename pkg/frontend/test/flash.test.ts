import { describe, expect, it } from "vitest";

import { MeasureFlash, type TimerHost } from "../src/flash.js";

// Deterministic stand-in for setTimeout: timers fire only when the test
// says so, and every set/clear is recorded.
class ManualTimers implements TimerHost {
  private nextId = 1;
  pending = new Map<number, { fn: () => void; delayMs: number }>();
  setCalls: number[] = [];
  clearCalls: number[] = [];

  set(fn: () => void, delayMs: number): number {
    const id = this.nextId++;
    this.pending.set(id, { fn, delayMs });
    this.setCalls.push(delayMs);
    return id;
  }

  clear(handle: number): void {
    this.clearCalls.push(handle);
    this.pending.delete(handle);
  }

  fire(handle: number): void {
    const entry = this.pending.get(handle);
    if (!entry) throw new Error(`no pending timer ${handle}`);
    this.pending.delete(handle);
    entry.fn();
  }

  fireAll(): void {
    for (const id of [...this.pending.keys()]) this.fire(id);
  }
}

describe("MeasureFlash", () => {
  it("arms one timer for a future onset", () => {
    const fired: number[] = [];
    const timers = new ManualTimers();
    const flash = new MeasureFlash((t) => fired.push(t), () => 1000, timers);

    expect(flash.schedule(1450)).toBe(true);
    expect(timers.setCalls).toEqual([450]);
    expect(flash.armed).toBe(true);

    timers.fireAll();
    expect(fired).toEqual([1450]);
    expect(flash.armed).toBe(false);
  });

  it("skips onsets that are already in the past", () => {
    const fired: number[] = [];
    const timers = new ManualTimers();
    const flash = new MeasureFlash((t) => fired.push(t), () => 2000, timers);

    expect(flash.schedule(1999)).toBe(false);
    expect(timers.setCalls).toEqual([]);
    expect(flash.armed).toBe(false);
    expect(fired).toEqual([]);
  });

  it("lets the newest schedule win", () => {
    const fired: number[] = [];
    const timers = new ManualTimers();
    const flash = new MeasureFlash((t) => fired.push(t), () => 0, timers);

    flash.schedule(500);
    flash.schedule(750);
    // The first timer was cancelled, so only the second can fire.
    expect(timers.clearCalls.length).toBe(1);
    expect(timers.pending.size).toBe(1);

    timers.fireAll();
    expect(fired).toEqual([750]);
  });

  it("cancel disarms without firing", () => {
    const fired: number[] = [];
    const timers = new ManualTimers();
    const flash = new MeasureFlash((t) => fired.push(t), () => 0, timers);

    flash.schedule(300);
    flash.cancel();
    expect(flash.armed).toBe(false);
    expect(timers.pending.size).toBe(0);
    expect(fired).toEqual([]);
  });
});
