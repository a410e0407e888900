/**
 * Client-side preview of the attention derivation.
 *
 * Port of the server's replay rule: per-token visibility intervals swept from
 * the event log in integer milliseconds, with the single float division at
 * the very end. A token is visible from each unblur that includes it until
 * the earliest of the next unblur excluding it, a blur_everything, 3000 ms
 * after the last event, an edit that removes it, or session end. Identical
 * event logs therefore produce bit-identical weights here and server-side
 * (IEEE 754 division is exact in both runtimes).
 */

import { SnippetText } from "./tokens.js";
import { TrackingState, applyEditTracking, initialTracking } from "./tracking.js";

export const INACTIVITY_TIMEOUT_MS = 3000;
export { MAX_WINDOW_TOKENS } from "./tokens.js";

export interface UnblurEvent {
  t: number;
  kind: "unblur";
  focus: number;
  visible: number[];
  input?: string;
}

export interface BlurEvent {
  t: number;
  kind: "blur_everything";
}

export interface EditEvent {
  t: number;
  kind: "edit";
  line: number;
  text: string;
}

export type SessionEvent = UnblurEvent | BlurEvent | EditEvent;

export class MalformedLogError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "MalformedLogError";
  }
}

/** Structural event checks: timestamp order and unblur set shape. */
export function validateEvents(snippet: SnippetText, events: readonly SessionEvent[]): void {
  let prevT = 0;
  events.forEach((ev, k) => {
    if (ev.t < prevT) {
      throw new MalformedLogError(`event ${k} timestamp ${ev.t} decreases`);
    }
    prevT = ev.t;
    if (ev.kind === "unblur") {
      if (ev.visible.length === 0) {
        throw new MalformedLogError(`event ${k}: unblur with empty visible set`);
      }
      if (ev.visible.length > 7) {
        throw new MalformedLogError(`event ${k}: ${ev.visible.length} visible tokens exceeds 7`);
      }
      const lines = new Set<number>();
      for (const i of ev.visible) {
        if (i < 0 || i >= snippet.tokens.length) {
          throw new MalformedLogError(`event ${k}: token index ${i} outside snippet`);
        }
        lines.add(snippet.tokens[i].line);
      }
      if (!ev.visible.includes(ev.focus)) {
        throw new MalformedLogError(`event ${k}: focus token not in visible set`);
      }
      if (lines.size > 1) {
        throw new MalformedLogError(`event ${k}: visible set spans lines`);
      }
    }
  });
}

export interface Timeline {
  durationMs: number;
  intervals: Map<number, Array<[number, number]>>;
  finalTracking: TrackingState;
}

function merge(intervals: Array<[number, number]>): Array<[number, number]> {
  const merged: Array<[number, number]> = [];
  for (const [s, e] of intervals) {
    if (e <= s) continue;
    const last = merged[merged.length - 1];
    if (last !== undefined && s <= last[1]) {
      last[1] = Math.max(last[1], e);
    } else {
      merged.push([s, e]);
    }
  }
  return merged;
}

export function buildTimeline(
  snippet: SnippetText,
  events: readonly SessionEvent[],
  durationMs: number,
): Timeline {
  validateEvents(snippet, events);
  if (durationMs <= 0) {
    throw new MalformedLogError(`non-positive session duration ${durationMs}`);
  }

  let tracking = initialTracking(snippet.lineTokens(snippet.buggyLine));
  const raw = new Map<number, Array<[number, number]>>();
  const openSince = new Map<number, number>();
  let lastActivity = 0;

  const close = (idx: number, at: number): void => {
    const start = openSince.get(idx)!;
    openSince.delete(idx);
    let list = raw.get(idx);
    if (list === undefined) {
      list = [];
      raw.set(idx, list);
    }
    list.push([start, Math.min(at, durationMs)]);
  };

  const closeAll = (at: number): void => {
    for (const idx of [...openSince.keys()]) close(idx, at);
  };

  for (const ev of events) {
    if (ev.t > durationMs) {
      throw new MalformedLogError(`event at ${ev.t} ms is past session end ${durationMs} ms`);
    }
    if (openSince.size > 0 && ev.t > lastActivity + INACTIVITY_TIMEOUT_MS) {
      closeAll(lastActivity + INACTIVITY_TIMEOUT_MS);
    }
    if (ev.kind === "unblur") {
      const effective = ev.visible.filter((i) => !tracking.untracked.has(i));
      const keep = new Set(effective);
      for (const idx of [...openSince.keys()]) {
        if (!keep.has(idx)) close(idx, ev.t);
      }
      for (const idx of effective) {
        if (!openSince.has(idx)) openSince.set(idx, ev.t);
      }
    } else if (ev.kind === "blur_everything") {
      closeAll(ev.t);
    } else {
      const before = tracking.untracked;
      tracking = applyEditTracking(tracking, ev.text);
      for (const idx of tracking.untracked) {
        if (!before.has(idx) && openSince.has(idx)) close(idx, ev.t);
      }
    }
    lastActivity = ev.t;
  }

  if (openSince.size > 0) {
    closeAll(Math.min(lastActivity + INACTIVITY_TIMEOUT_MS, durationMs));
  }

  const intervals = new Map<number, Array<[number, number]>>();
  for (const [idx, list] of raw) {
    const m = merge(list);
    if (m.length > 0) intervals.set(idx, m);
  }
  return { durationMs, intervals, finalTracking: tracking };
}

/** Visible time per token divided by session duration, one weight per original token. */
export function previewAttention(
  snippet: SnippetText,
  events: readonly SessionEvent[],
  durationMs: number,
): number[] {
  const timeline = buildTimeline(snippet, events, durationMs);
  const weights: number[] = [];
  for (let i = 0; i < snippet.tokens.length; i++) {
    let visible = 0;
    for (const [s, e] of timeline.intervals.get(i) ?? []) visible += e - s;
    weights.push(visible / durationMs);
  }
  return weights;
}
