// The service timestamps everything on its own monotonic session clock,
// zeroed when the connection opens. We estimate our offset to it once per
// connection: send a ping at local time a, receive the pong at local time
// b, and take the pong's echoed at_ms to have happened at the midpoint
// (a + b) / 2, i.e. offset = at_ms - midpoint. Half the round trip is the
// residual error bound.

export class ServiceClock {
  private offset: number | null = null;

  constructor(private readonly localNow: () => number = () => performance.now()) {}

  now(): number {
    return this.localNow();
  }

  get synced(): boolean {
    return this.offset !== null;
  }

  /** Absorb one ping/pong exchange; returns the round-trip time. */
  applyPong(sentAt: number, receivedAt: number, serviceAt?: number): number {
    const midpoint = (sentAt + receivedAt) / 2;
    // A pong without a clock reading implies the session clock zeroed at
    // the exchange itself (fresh connection): same formula with 0.
    this.offset = (serviceAt ?? 0) - midpoint;
    return receivedAt - sentAt;
  }

  toService(localMs: number): number {
    if (this.offset === null) throw new Error("clock not synced yet");
    return localMs + this.offset;
  }

  fromService(serviceMs: number): number {
    if (this.offset === null) throw new Error("clock not synced yet");
    return serviceMs - this.offset;
  }

  reset(): void {
    this.offset = null;
  }
}
