/**
 * Injectable session clock. Timestamps are integer milliseconds relative to
 * the moment the session opened, which is what the recorded event stream and
 * the attention normalizer use; wall-clock time never appears in a session.
 */

export interface Clock {
  /** current session-relative time in whole milliseconds */
  now(): number;
  setTimeout(fn: () => void, ms: number): number;
  clearTimeout(handle: number): void;
}

/** Browser clock: performance.now() rebased to the session start. */
export class RealClock implements Clock {
  private readonly t0 = performance.now();

  now(): number {
    return Math.round(performance.now() - this.t0);
  }

  setTimeout(fn: () => void, ms: number): number {
    return globalThis.setTimeout(fn, ms) as unknown as number;
  }

  clearTimeout(handle: number): void {
    globalThis.clearTimeout(handle);
  }
}

interface PendingTimer {
  readonly handle: number;
  readonly due: number;
  readonly seq: number;
  readonly fn: () => void;
}

/**
 * Deterministic clock for tests and replays. `advanceTo(t)` runs every timer
 * due at or before t in due order, with now() frozen at each timer's due time
 * while it runs — so a re-blur timeout armed at 2600 stamps its event exactly
 * at 5600 no matter when the next gesture arrives.
 */
export class VirtualClock implements Clock {
  private t = 0;
  private nextHandle = 1;
  private seq = 0;
  private timers: PendingTimer[] = [];

  now(): number {
    return this.t;
  }

  setTimeout(fn: () => void, ms: number): number {
    const handle = this.nextHandle++;
    this.timers.push({ handle, due: this.t + ms, seq: this.seq++, fn });
    return handle;
  }

  clearTimeout(handle: number): void {
    this.timers = this.timers.filter((p) => p.handle !== handle);
  }

  advanceTo(t: number): void {
    if (t < this.t) {
      throw new Error(`cannot rewind virtual clock from ${this.t} to ${t}`);
    }
    for (;;) {
      const due = this.timers
        .filter((p) => p.due <= t)
        .sort((a, b) => a.due - b.due || a.seq - b.seq)[0];
      if (due === undefined) break;
      this.timers = this.timers.filter((p) => p.handle !== due.handle);
      this.t = Math.max(this.t, due.due);
      due.fn();
    }
    this.t = t;
  }

  advanceBy(ms: number): void {
    this.advanceTo(this.t + ms);
  }
}
