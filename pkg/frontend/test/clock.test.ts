import { describe, expect, it } from "vitest";

import { ServiceClock } from "../src/clock.js";

describe("ServiceClock", () => {
  it("derives the offset from the ping round trip midpoint", () => {
    const clock = new ServiceClock(() => 0);
    // Sent at local 100, answered at local 140: the service stamped its
    // clock at our local 120, so offset = 5000 - 120.
    const rtt = clock.applyPong(100, 140, 5000);
    expect(rtt).toBe(40);
    expect(clock.synced).toBe(true);
    expect(clock.toService(120)).toBe(5000);
    expect(clock.fromService(5000)).toBe(120);
  });

  it("round trips local and service instants", () => {
    const clock = new ServiceClock(() => 0);
    clock.applyPong(0, 30, 2000);
    for (const t of [0, 17.5, 333, 60000]) {
      expect(clock.fromService(clock.toService(t))).toBeCloseTo(t, 9);
    }
  });

  it("treats a bare pong as a service clock at zero", () => {
    const clock = new ServiceClock(() => 0);
    clock.applyPong(200, 200);
    expect(clock.toService(200)).toBe(0);
  });

  it("refuses conversions before the first pong", () => {
    const clock = new ServiceClock(() => 0);
    expect(clock.synced).toBe(false);
    expect(() => clock.toService(1)).toThrow(/not synced/);
    expect(() => clock.fromService(1)).toThrow(/not synced/);
  });

  it("forgets the offset on reset", () => {
    const clock = new ServiceClock(() => 0);
    clock.applyPong(0, 0, 10);
    clock.reset();
    expect(clock.synced).toBe(false);
  });
});
