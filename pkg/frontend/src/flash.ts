// One pending flash at a time, armed for the predicted measure onset.
// Estimates revise the prediction a few times per second, so the rule is
// last writer wins: scheduling cancels whatever was armed before. Onsets
// already in the past are skipped outright.

export interface TimerHost {
  set(fn: () => void, delayMs: number): unknown;
  clear(handle: unknown): void;
}

const realTimers: TimerHost = {
  set: (fn, delayMs) => setTimeout(fn, delayMs),
  clear: (handle) => clearTimeout(handle as ReturnType<typeof setTimeout>),
};

export class MeasureFlash {
  private handle: unknown = null;

  constructor(
    private readonly fire: (localOnsetMs: number) => void,
    private readonly localNow: () => number = () => performance.now(),
    private readonly timers: TimerHost = realTimers,
  ) {}

  /** Arm the flash for a local-clock onset; false if it already passed. */
  schedule(localOnsetMs: number): boolean {
    const delay = localOnsetMs - this.localNow();
    if (delay < 0) return false;
    this.cancel();
    this.handle = this.timers.set(() => {
      this.handle = null;
      this.fire(localOnsetMs);
    }, delay);
    return true;
  }

  cancel(): void {
    if (this.handle !== null) {
      this.timers.clear(this.handle);
      this.handle = null;
    }
  }

  get armed(): boolean {
    return this.handle !== null;
  }
}
