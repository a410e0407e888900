/**
 * Which original buggy-line tokens survive the edits made so far.
 *
 * Mirrors the server's edit-tracking rule exactly: after each edit the still
 * tracked originals are re-matched against the new line text by longest
 * common subsequence on exact token texts (leftmost alignment on ties).
 * Originals that drop out become permanently untracked; tokens inserted by
 * edits are never tracked at all.
 */

import { Token, tokenizeLine } from "./tokens.js";

/** An original buggy-line token still present in the edited line. */
export interface TrackedToken {
  readonly tokenIndex: number;
  readonly text: string;
  /** columns in the *current* line text */
  readonly colStart: number;
  readonly colEnd: number;
}

export interface TrackingState {
  readonly tracked: readonly TrackedToken[];
  readonly untracked: ReadonlySet<number>;
}

export function initialTracking(buggyLineTokens: readonly Token[]): TrackingState {
  return {
    tracked: buggyLineTokens.map((t) => ({
      tokenIndex: t.index,
      text: t.text,
      colStart: t.colStart,
      colEnd: t.colEnd,
    })),
    untracked: new Set(),
  };
}

export function trackedIndices(state: TrackingState): Set<number> {
  return new Set(state.tracked.map((t) => t.tokenIndex));
}

/** Longest common subsequence of exact texts; leftmost alignment on ties. */
export function lcsMatch(oldTexts: readonly string[], newTexts: readonly string[]): Array<[number, number]> {
  const n = oldTexts.length;
  const m = newTexts.length;
  const dp: number[][] = Array.from({ length: n + 1 }, () => new Array<number>(m + 1).fill(0));
  for (let i = n - 1; i >= 0; i--) {
    for (let j = m - 1; j >= 0; j--) {
      dp[i][j] = oldTexts[i] === newTexts[j]
        ? dp[i + 1][j + 1] + 1
        : Math.max(dp[i + 1][j], dp[i][j + 1]);
    }
  }
  const pairs: Array<[number, number]> = [];
  let i = 0;
  let j = 0;
  while (i < n && j < m) {
    if (oldTexts[i] === newTexts[j] && dp[i][j] === dp[i + 1][j + 1] + 1) {
      pairs.push([i, j]);
      i += 1;
      j += 1;
    } else if (dp[i + 1][j] >= dp[i][j + 1]) {
      i += 1;
    } else {
      j += 1;
    }
  }
  return pairs;
}

/**
 * Re-match tracked originals against the edited line text. The caller is
 * responsible for rejecting edits off the buggy line and multi-line payloads
 * before any state changes.
 */
export function applyEditTracking(state: TrackingState, newLineText: string): TrackingState {
  const newTokens = tokenizeLine(newLineText);
  const pairs = lcsMatch(
    state.tracked.map((t) => t.text),
    newTokens.map((t) => t.text),
  );
  const matchedOld = new Set(pairs.map(([i]) => i));
  const tracked = pairs.map(([i, j]) => ({
    tokenIndex: state.tracked[i].tokenIndex,
    text: state.tracked[i].text,
    colStart: newTokens[j].colStart,
    colEnd: newTokens[j].colEnd,
  }));
  const untracked = new Set(state.untracked);
  state.tracked.forEach((t, i) => {
    if (!matchedOld.has(i)) untracked.add(t.tokenIndex);
  });
  return { tracked, untracked };
}
