// UiSession owns everything between the socket and the page: the clock
// offset handshake, the tap queue while disconnected, the rolling list of
// recent estimates, and the decision of when the measure flash is armed.
// The transport is injected as a bare send function so tests (and a
// fixture replay) can drive the whole thing without a network.

import { ServiceClock } from "./clock.js";
import { MeasureFlash, TimerHost } from "./flash.js";
import {
  EstimateRecord,
  ProtocolError,
  decodeServerRecord,
  encodeNote,
  encodePing,
} from "./protocol.js";
import {
  ViewState,
  renderEstimate,
  renderProtocolFailure,
  renderStatus,
} from "./view.js";

export type ConnectionState = "idle" | "connecting" | "live" | "closed";

export const DEFAULT_TAP_VELOCITIES: Record<string, number> = {
  pointer: 1.0,
  "key-hard": 1.0,
  "key-soft": 0.5,
};

interface QueuedTap {
  localT: number;
  v: number;
}

export interface UiSessionOptions {
  send: (line: string) => void;
  onRender?: (view: ViewState) => void;
  onFlash?: (localOnsetMs: number) => void;
  localNow?: () => number;
  timers?: TimerHost;
  tapVelocities?: Record<string, number>;
  historyLimit?: number;
}

export class UiSession {
  readonly clock: ServiceClock;
  state: ConnectionState = "idle";
  estimates: EstimateRecord[] = [];

  private readonly send: (line: string) => void;
  private readonly onRender: (view: ViewState) => void;
  private readonly flash: MeasureFlash;
  private readonly velocities: Record<string, number>;
  private readonly historyLimit: number;
  private queue: QueuedTap[] = [];
  private pingSentAt: number | null = null;

  constructor(options: UiSessionOptions) {
    this.send = options.send;
    this.onRender = options.onRender ?? (() => {});
    const localNow = options.localNow ?? (() => performance.now());
    this.clock = new ServiceClock(localNow);
    this.flash = new MeasureFlash(
      options.onFlash ?? (() => {}),
      localNow,
      options.timers,
    );
    this.velocities = options.tapVelocities ?? DEFAULT_TAP_VELOCITIES;
    this.historyLimit = options.historyLimit ?? 32;
  }

  /** The socket is dialing: taps from here on are queued. */
  connecting(): void {
    this.state = "connecting";
  }

  /** The socket opened: start the clock handshake. */
  opened(): void {
    this.pingSentAt = this.clock.now();
    this.send(encodePing());
  }

  disconnected(): void {
    this.state = "closed";
    this.flash.cancel();
    this.clock.reset();
  }

  /**
   * A tap from the pad or keyboard. Timestamped with the local clock at
   * the moment it happened; sent offset-corrected once we are live,
   * queued (original instant kept) otherwise.
   */
  tap(source: string): void {
    const v = this.velocities[source] ?? 1.0;
    const localT = this.clock.now();
    if (this.state === "live") {
      this.send(encodeNote(this.toServiceClamped(localT), v));
    } else {
      this.queue.push({ localT, v });
    }
  }

  /** One server line in; one view state out (null for pure acks). */
  handleLine(line: string): ViewState | null {
    let record;
    try {
      record = decodeServerRecord(line);
    } catch (err) {
      if (err instanceof ProtocolError) {
        const view = renderProtocolFailure(err.message);
        this.onRender(view);
        return view;
      }
      throw err;
    }
    switch (record.type) {
      case "pong": {
        const sentAt = this.pingSentAt ?? this.clock.now();
        this.clock.applyPong(sentAt, this.clock.now(), record.at_ms);
        this.pingSentAt = null;
        this.state = "live";
        this.flushQueue();
        return null;
      }
      case "status": {
        if (record.state === "ok") return null; // note ack, nothing to show
        const view = renderStatus(record);
        this.onRender(view);
        return view;
      }
      case "estimate": {
        this.estimates.push(record);
        if (this.estimates.length > this.historyLimit) {
          this.estimates.splice(0, this.estimates.length - this.historyLimit);
        }
        if (!record.stale && this.clock.synced) {
          this.flash.schedule(this.clock.fromService(record.next_measure_onset_ms));
        }
        const view = renderEstimate(record);
        this.onRender(view);
        return view;
      }
    }
  }

  get queuedTaps(): number {
    return this.queue.length;
  }

  private flushQueue(): void {
    const pending = this.queue;
    this.queue = [];
    for (const tap of pending) {
      this.send(encodeNote(this.toServiceClamped(tap.localT), tap.v));
    }
  }

  private toServiceClamped(localT: number): number {
    // A tap queued before this session's clock existed can land negative
    // after conversion; the service rejects t < 0, so pin it to the epoch.
    return Math.max(0, this.clock.toService(localT));
  }
}
