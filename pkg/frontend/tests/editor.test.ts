import { describe, expect, it } from "vitest";

import { VirtualClock } from "../src/clock.js";
import { EditorCore } from "../src/editor.js";
import { SnippetText } from "../src/tokens.js";
import { validateEvents } from "../src/timeline.js";
import { mulberry32, scriptedSession as fx } from "./helpers.js";

const task = { source: fx.snippet.source, buggy_line: fx.snippet.buggy_line };
const snippet = new SnippetText(task.source, task.buggy_line);
const originalLine = snippet.lineText(task.buggy_line);

function fresh(): { clock: VirtualClock; core: EditorCore } {
  const clock = new VirtualClock();
  return { clock, core: new EditorCore(task, clock) };
}

describe("edit restriction", () => {
  it("edits off the buggy line emit nothing and change nothing", () => {
    const { core } = fresh();
    for (const line of [1, 2, 3, 5, 6]) {
      const before = core.lineText(line);
      expect(core.applyEdit(line, "    return 0;")).toBe(false);
      expect(core.lineText(line)).toBe(before);
    }
    expect(core.events).toHaveLength(0);
    expect(core.lineText(task.buggy_line)).toBe(originalLine);
  });

  it("multi-line payloads are rejected even on the buggy line", () => {
    const { core } = fresh();
    expect(core.applyEdit(task.buggy_line, "int a;\nint b;")).toBe(false);
    expect(core.events).toHaveLength(0);
    expect(core.lineText(task.buggy_line)).toBe(originalLine);
  });

  it("a buggy-line edit emits one edit event carrying the full new text", () => {
    const { clock, core } = fresh();
    clock.advanceTo(500);
    expect(core.applyEdit(task.buggy_line, fx.expected_final_buggy_line)).toBe(true);
    expect(core.events).toEqual([
      { t: 500, kind: "edit", line: task.buggy_line, text: fx.expected_final_buggy_line },
    ]);
    expect(core.lineText(task.buggy_line)).toBe(fx.expected_final_buggy_line);
  });

  it("an edit while fully blurred never triggers a re-blur event", () => {
    const { clock, core } = fresh();
    core.applyEdit(task.buggy_line, fx.expected_final_buggy_line);
    clock.advanceTo(10_000);
    expect(core.events.map((e) => e.kind)).toEqual(["edit"]);
  });
});

describe("gesture emission rules", () => {
  it("rapid hover across three tokens emits three ordered unblurs", () => {
    const { clock, core } = fresh();
    const [a, b, c] = snippet.lineTokens(task.buggy_line);
    core.moveCursor(a.line, a.colStart, "pointer");
    clock.advanceTo(40);
    core.moveCursor(b.line, b.colStart, "cursor");
    clock.advanceTo(80);
    core.moveCursor(c.line, c.colStart, "pointer");
    expect(core.events.map((e) => e.kind)).toEqual(["unblur", "unblur", "unblur"]);
    expect(core.events.map((e) => e.t)).toEqual([0, 40, 80]);
    const inputs = core.events.map((e) => (e.kind === "unblur" ? e.input : null));
    expect(inputs).toEqual(["pointer", "cursor", "pointer"]);
  });

  it("moving within the focused token is suppressed", () => {
    const { clock, core } = fresh();
    const tok = snippet.lineTokens(task.buggy_line)[1];
    core.moveCursor(tok.line, tok.colStart);
    clock.advanceTo(100);
    core.moveCursor(tok.line, tok.colEnd - 1);
    expect(core.events).toHaveLength(1);
  });

  it("misses over whitespace or past the line end emit nothing", () => {
    const { clock, core } = fresh();
    core.moveCursor(task.buggy_line, 0); // indentation
    clock.advanceTo(50);
    core.moveCursor(task.buggy_line, originalLine.length + 10);
    clock.advanceTo(100);
    core.moveCursor(0, 0); // off the snippet entirely
    core.moveCursor(snippet.lines.length + 1, 0);
    expect(core.events).toHaveLength(0);
  });
});

describe("post-edit display mapping", () => {
  // the committed script: hover col 23 at t=7000 gives focus 26, visible 23..29,
  // and the fixture edit drops original token 26 from tracking
  it("an edit narrows the live mask to surviving originals", () => {
    const { clock, core } = fresh();
    core.moveCursor(task.buggy_line, 23);
    expect([...core.blurMask()].sort((a, b) => a - b)).toEqual([23, 24, 25, 26, 27, 28, 29]);
    clock.advanceTo(400);
    core.applyEdit(task.buggy_line, fx.expected_final_buggy_line);
    expect([...core.blurMask()].sort((a, b) => a - b)).toEqual([23, 24, 25, 27, 28, 29]);
  });

  it("inserted tokens have no original and never unblur anything", () => {
    const { clock, core } = fresh();
    core.applyEdit(task.buggy_line, fx.expected_final_buggy_line);
    const display = core.displayTokens(task.buggy_line);
    const originals = core.displayOriginals(task.buggy_line);
    const inserted = display.filter((_, i) => originals[i] === null);
    expect(inserted.length).toBeGreaterThan(0);
    clock.advanceTo(100);
    for (const tok of inserted) {
      core.moveCursor(task.buggy_line, tok.colStart);
    }
    expect(core.events.map((e) => e.kind)).toEqual(["edit"]);
  });

  it("hovering a surviving token unblurs only tracked originals", () => {
    const { clock, core } = fresh();
    core.applyEdit(task.buggy_line, fx.expected_final_buggy_line);
    const display = core.displayTokens(task.buggy_line);
    const originals = core.displayOriginals(task.buggy_line);
    const tracked = new Set(originals.filter((i): i is number => i !== null));
    clock.advanceTo(100);
    display.forEach((tok, i) => {
      if (originals[i] === null) return;
      core.moveCursor(task.buggy_line, tok.colStart);
      const last = core.events[core.events.length - 1];
      expect(last.kind).toBe("unblur");
      if (last.kind === "unblur") {
        expect(last.focus).toBe(originals[i]);
        expect(last.visible.length).toBeLessThanOrEqual(7);
        for (const idx of last.visible) expect(tracked.has(idx)).toBe(true);
      }
    });
  });

  it("unedited lines keep the plain window law after an edit elsewhere", () => {
    const { clock, core } = fresh();
    core.applyEdit(task.buggy_line, fx.expected_final_buggy_line);
    clock.advanceTo(100);
    const tok = snippet.lineTokens(5)[0];
    core.moveCursor(5, tok.colStart);
    const last = core.events[core.events.length - 1];
    if (last.kind === "unblur") {
      const lines = new Set(last.visible.map((i) => snippet.tokens[i].line));
      expect(lines).toEqual(new Set([5]));
    } else {
      expect.unreachable("expected an unblur");
    }
  });
});

describe("fuzzed gesture streams keep the log well-formed", () => {
  const editPool = [
    originalLine,
    fx.expected_final_buggy_line,
    "int mid=(lo+hi)/2;",
    "    int mid = lo;",
    '    int mid = "wip § ',
    "",
  ];

  for (const seed of [1, 2, 3]) {
    it(`seed ${seed}`, () => {
      const rng = mulberry32(seed);
      const { clock, core } = fresh();
      let t = 0;
      for (let step = 0; step < 150; step++) {
        t += Math.floor(rng() * 4000);
        clock.advanceTo(t);
        const roll = rng();
        if (roll < 0.75) {
          const line = 1 + Math.floor(rng() * snippet.lines.length);
          const col = Math.floor(rng() * (snippet.lineText(line).length + 4));
          core.moveCursor(line, col, rng() < 0.5 ? "pointer" : "cursor");
        } else {
          const line = rng() < 0.7 ? task.buggy_line : 1 + Math.floor(rng() * snippet.lines.length);
          const text = editPool[Math.floor(rng() * editPool.length)];
          const accepted = core.applyEdit(line, text);
          if (line !== task.buggy_line) expect(accepted).toBe(false);
        }
      }
      clock.advanceBy(3500); // let any pending re-blur land
      const events = core.events;
      for (let k = 1; k < events.length; k++) {
        expect(events[k].t).toBeGreaterThanOrEqual(events[k - 1].t);
      }
      for (const ev of events) {
        if (ev.kind === "unblur") {
          expect(ev.visible.length).toBeGreaterThanOrEqual(1);
          expect(ev.visible.length).toBeLessThanOrEqual(7);
          expect(ev.visible).toContain(ev.focus);
        }
        if (ev.kind === "edit") {
          expect(ev.line).toBe(task.buggy_line);
        }
      }
      expect(() => validateEvents(snippet, events)).not.toThrow();
      const weights = core.previewWeights(clock.now());
      for (const w of weights) {
        expect(w).toBeGreaterThanOrEqual(0);
        expect(w).toBeLessThanOrEqual(1);
      }
    });
  }
});
