/**
 * Headless blur-editor core: the gesture-to-event mapping.
 *
 * The rules here are frozen against the server by the committed fixtures in
 * fixtures/ (see ../scripts/make_frontend_fixtures.py in the repo root):
 *
 * - Pointer/cursor moves hit-test against the displayed tokens of the target
 *   line. Misses (whitespace, beyond end of line) do nothing at all — no
 *   event, no timer restart. Re-hovering the token that is already the focus
 *   of the current mask emits nothing.
 * - On an unedited line the emitted visible set is the cursor±3 same-line
 *   window over original token indices. On the buggy line after an edit the
 *   window is taken over the displayed (re-lexed) tokens and mapped back to
 *   surviving originals; inserted tokens drop out, and if the focused token
 *   has no surviving original, nothing is emitted.
 * - Edits off the buggy line (or spanning lines) are rejected before any
 *   event exists; the text stays unchanged. Buggy-line edits replace the
 *   line, emit one edit event with the full new text, and permanently blur
 *   originals the edit removed.
 * - Everything re-blurs 3000 ms after the last *emitted* event: gestures the
 *   server cannot see must not hold the mask open. The blur_everything event
 *   fires once, stamped at the timer's due time, and only while the mask
 *   still shows something.
 */

import { Clock } from "./clock.js";
import { INACTIVITY_TIMEOUT_MS, SessionEvent, previewAttention } from "./timeline.js";
import { SnippetText, Token, computeWindow, tokenizeLine } from "./tokens.js";
import { TrackingState, applyEditTracking, initialTracking, trackedIndices } from "./tracking.js";

export type InputSource = "pointer" | "cursor";

export interface SubmissionDoc {
  t: number;
  label: "fix_done" | "cannot_fix";
  final_buggy_line: string;
  external_source: boolean;
}

export class EditorCore {
  readonly snippet: SnippetText;
  /** complete emitted event log, in order */
  readonly events: SessionEvent[] = [];

  private buggyText: string;
  private edited = false;
  private tracking: TrackingState;
  private mask = new Set<number>();
  private focus: number | null = null;
  private timer: number | null = null;
  private readonly onEvent?: (ev: SessionEvent) => void;

  constructor(
    task: { source: string; buggy_line: number },
    private readonly clock: Clock,
    onEvent?: (ev: SessionEvent) => void,
  ) {
    this.snippet = new SnippetText(task.source, task.buggy_line);
    this.buggyText = this.snippet.lineText(this.snippet.buggyLine);
    this.tracking = initialTracking(this.snippet.lineTokens(this.snippet.buggyLine));
    this.onEvent = onEvent;
  }

  /** current text of a display line (the buggy line reflects edits) */
  lineText(line: number): string {
    return line === this.snippet.buggyLine ? this.buggyText : this.snippet.lineText(line);
  }

  /** original token indices currently unblurred */
  blurMask(): Set<number> {
    return new Set(this.mask);
  }

  currentFocus(): number | null {
    return this.focus;
  }

  /** displayed tokens of a line: re-lexed for the edited buggy line */
  displayTokens(line: number): Token[] {
    if (this.edited && line === this.snippet.buggyLine) {
      return tokenizeLine(this.buggyText);
    }
    return this.snippet.lineTokens(line);
  }

  /**
   * Original token index behind each displayed token of a line; null for
   * inserted tokens, which can never become visible.
   */
  displayOriginals(line: number): (number | null)[] {
    const display = this.displayTokens(line);
    if (!(this.edited && line === this.snippet.buggyLine)) {
      return display.map((d) => d.index);
    }
    const byCol = new Map(this.tracking.tracked.map((tt) => [tt.colStart, tt.tokenIndex]));
    return display.map((d) => byCol.get(d.colStart) ?? null);
  }

  moveCursor(line: number, col: number, input: InputSource = "pointer"): void {
    if (line < 1 || line > this.snippet.lines.length) return;
    const t = this.clock.now();
    let newFocus: number;
    let visible: number[];
    if (this.edited && line === this.snippet.buggyLine) {
      const display = tokenizeLine(this.buggyText);
      const hit = hitTest(display, col);
      if (hit === null) return;
      const byCol = new Map(this.tracking.tracked.map((tt) => [tt.colStart, tt.tokenIndex]));
      const mapped = byCol.get(hit.colStart);
      if (mapped === undefined) return;
      newFocus = mapped;
      const lo = Math.max(hit.index - 3, 0);
      const hi = Math.min(hit.index + 3, display.length - 1);
      visible = display
        .slice(lo, hi + 1)
        .map((d) => byCol.get(d.colStart))
        .filter((i): i is number => i !== undefined)
        .sort((a, b) => a - b);
    } else {
      const hit = hitTest(this.snippet.lineTokens(line), col);
      if (hit === null) return;
      newFocus = hit.index;
      visible = computeWindow(this.snippet, hit.index);
    }
    if (newFocus === this.focus && this.mask.has(newFocus)) return;
    this.emit({ t, kind: "unblur", focus: newFocus, visible, input });
    this.mask = new Set(visible);
    this.focus = newFocus;
  }

  /**
   * Apply an edit gesture. Returns true when accepted; edits off the buggy
   * line or spanning lines are rejected with no event and no text change.
   */
  applyEdit(line: number, text: string): boolean {
    if (line !== this.snippet.buggyLine || text.includes("\n")) {
      return false;
    }
    const t = this.clock.now();
    this.tracking = applyEditTracking(this.tracking, text);
    this.buggyText = text;
    this.edited = true;
    const stillTracked = trackedIndices(this.tracking);
    this.mask = new Set([...this.mask].filter((i) => stillTracked.has(i)));
    this.emit({ t, kind: "edit", line, text });
    return true;
  }

  submission(label: "fix_done" | "cannot_fix", externalSource = false): SubmissionDoc {
    return {
      t: this.clock.now(),
      label,
      final_buggy_line: this.buggyText,
      external_source: externalSource,
    };
  }

  /** client-side preview of the attention vector the server will derive */
  previewWeights(durationMs?: number): number[] {
    return previewAttention(this.snippet, this.events, durationMs ?? this.clock.now());
  }

  private emit(ev: SessionEvent): void {
    this.events.push(ev);
    this.onEvent?.(ev);
    this.armTimer();
  }

  private armTimer(): void {
    if (this.timer !== null) this.clock.clearTimeout(this.timer);
    this.timer = this.clock.setTimeout(() => this.onInactivity(), INACTIVITY_TIMEOUT_MS);
  }

  private onInactivity(): void {
    this.timer = null;
    if (this.mask.size === 0) return;
    this.mask.clear();
    this.focus = null;
    this.emit({ t: this.clock.now(), kind: "blur_everything" });
  }
}

function hitTest(tokens: readonly Token[], col: number): Token | null {
  for (const tok of tokens) {
    if (tok.colStart <= col && col < tok.colEnd) return tok;
  }
  return null;
}
