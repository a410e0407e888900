/**
 * Shared fixture loading for the test suite. Both JSON files under
 * ../fixtures are generated and revalidated server-side; the tests here
 * treat them as the authoritative cross-implementation contract.
 */

import { readFileSync } from "node:fs";

import { VirtualClock } from "../src/clock.js";
import { EditorCore, SubmissionDoc } from "../src/editor.js";
import { SessionEvent } from "../src/timeline.js";

export interface FixtureToken {
  index: number;
  text: string;
  line: number;
  col_start: number;
  col_end: number;
  class: string;
}

export interface FixtureSnippet {
  snippet_id: string;
  source: string;
  buggy_line: number;
  description: string;
}

export interface WindowTable {
  format_version: number;
  snippet: FixtureSnippet;
  tokens: FixtureToken[];
  windows: number[][];
}

export interface ScriptGesture {
  t: number;
  action: "move" | "edit" | "submit";
  line?: number;
  col?: number;
  input?: "pointer" | "cursor";
  text?: string;
  label?: "fix_done" | "cannot_fix";
  external_source?: boolean;
}

export interface ScriptedSession {
  format_version: number;
  snippet: FixtureSnippet;
  tokens: FixtureToken[];
  script: ScriptGesture[];
  expected_events: SessionEvent[];
  expected_final_buggy_line: string;
  label: "fix_done" | "cannot_fix";
  duration_ms: number;
  expected_weights: number[];
}

function load<T>(name: string): T {
  const raw = readFileSync(new URL(`../fixtures/${name}`, import.meta.url), "utf8");
  return JSON.parse(raw) as T;
}

export const windowTable = load<WindowTable>("window_table.json");
export const scriptedSession = load<ScriptedSession>("scripted_session.json");

/** Drive an editor through a gesture script on a virtual clock. */
export function runScript(
  core: EditorCore,
  clock: VirtualClock,
  script: readonly ScriptGesture[],
): SubmissionDoc | null {
  let submission: SubmissionDoc | null = null;
  for (const g of script) {
    clock.advanceTo(g.t);
    if (g.action === "move") {
      core.moveCursor(g.line!, g.col!, g.input);
    } else if (g.action === "edit") {
      core.applyEdit(g.line!, g.text!);
    } else {
      submission = core.submission(g.label!, g.external_source ?? false);
    }
  }
  return submission;
}

/** Small deterministic PRNG for fuzz loops (mulberry32). */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}
