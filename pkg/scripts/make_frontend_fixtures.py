"""Generate the golden fixtures shared by the analysis kernel and the browser editor.

Writes two committed JSON files under frontend/fixtures/:

  window_table.json     every token position of one corpus-style snippet mapped
                        to its unblur window, plus the full token table — pins
                        the editor-side lexer and window computation to the
                        kernel's.
  scripted_session.json a full scripted bug-fixing session: raw pointer/edit
                        gestures, the exact event stream the editor must emit
                        for them, and the attention vector the kernel derives
                        from that stream — pins the editor's gesture-to-event
                        mapping and its client-side preview arithmetic.

The test suite regenerates both fixtures in memory and fails on any byte drift,
so the two implementations cannot disagree silently. Run this script only when
the fixtures are deliberately being changed:

    python3 scripts/make_frontend_fixtures.py
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from codegaze.sessions import (
    INACTIVITY_TIMEOUT_MS,
    EventValidator,
    InteractionEvent,
    SessionRecord,
    TrackedLineState,
    apply_edit,
    derive_attention,
    event_to_doc,
)
from codegaze.tokens import Snippet, Token, compute_window, tokenize_line

FIXTURE_FORMAT_VERSION = 1

REPO_ROOT = Path(__file__).resolve().parents[1]
FIXTURE_DIR = REPO_ROOT / "frontend" / "fixtures"

# Deliberately lexer-heavy: block and line comments, hex/underscore/exponent
# and suffixed numbers, escaped char and string literals, $-identifiers,
# compound operators, '::' and '...' separators, an annotation, and generics.
WINDOW_SOURCE = """\
/* Rolling checksum over a byte window.
   Overflow-safe accumulation. */
public final class RollingSum {
    private static final int MASK = 0xFF_FF;
    protected volatile long total$ = 0L;
    int pos;

    // fold one chunk into the running total
    @Deprecated
    static double fold(int[] data, double scale, long... extra) {
        double acc = .5e-2d;
        char sep = '\\t';
        String tag = "sum\\"v1\\"";
        for (int i = 0; i < data.length; ++i) {
            acc += (data[i] & MASK) >>> 2;
            acc = acc >= 1_000.0 ? acc % 97 : acc * scale;
        }
        boolean ok = acc != 0 && true;
        java.util.function.Supplier<Object> f = RollingSum::new;
        return ok ? acc : -1;  // ternary fallthrough
    }
}
"""

SESSION_SOURCE = """\
static int midpoint(int lo, int hi) {
    // avoid (lo + hi) overflow
    int span = hi - lo;
    int mid = lo + (hi + lo) / 2;
    return mid;
}
"""

SESSION_BUGGY_LINE = 4
SESSION_FIXED_LINE = "    int mid = lo + (hi - lo) / 2;"


def window_snippet() -> Snippet:
    lines = WINDOW_SOURCE.split("\n")
    buggy = next(k for k, text in enumerate(lines, start=1) if "acc +=" in text)
    return Snippet.from_source(
        "fixture_rollingsum",
        WINDOW_SOURCE,
        buggy,
        "Fold byte chunks into a rolling checksum without overflowing.",
    )


def session_snippet() -> Snippet:
    return Snippet.from_source(
        "fixture_midpoint",
        SESSION_SOURCE,
        SESSION_BUGGY_LINE,
        "Return the midpoint of lo and hi without overflowing the int range.",
    )


def snippet_doc(snippet: Snippet) -> dict:
    return {
        "snippet_id": snippet.snippet_id,
        "source": snippet.source,
        "buggy_line": snippet.buggy_line,
        "description": snippet.description,
    }


def token_docs(tokens: tuple[Token, ...] | list[Token]) -> list[dict]:
    return [
        {
            "index": tok.index,
            "text": tok.text,
            "line": tok.line,
            "col_start": tok.col_start,
            "col_end": tok.col_end,
            "class": tok.token_class.value,
        }
        for tok in tokens
    ]


def build_window_table() -> dict:
    snippet = window_snippet()
    return {
        "format_version": FIXTURE_FORMAT_VERSION,
        "snippet": snippet_doc(snippet),
        "tokens": token_docs(snippet.tokens),
        "windows": [compute_window(snippet, i) for i in range(len(snippet.tokens))],
    }


# --- reference model of the editor's gesture-to-event mapping ----------------
#
# The browser editor must implement exactly this mapping; the scripted-session
# fixture is generated from it and the editor test suite replays the script.
#
#   move(t, line, col):
#     Hit-test col against the displayed tokens of that line (original tokens,
#     or the lenient re-lex of the buggy line once it has been edited). Misses
#     (whitespace, past end of line) do nothing at all — no event, no timer
#     restart. On an unedited line the emitted visible set is the cursor±3
#     same-line window over original token indices. On the edited buggy line
#     the ±3 window is taken over displayed tokens and then mapped back to the
#     surviving original indices; edit-inserted tokens drop out, and if the
#     focused token itself has no surviving original, nothing is emitted.
#     Re-hovering the token that is already the focus of the current mask is
#     not a new gesture and emits nothing.
#
#   edit(t, line, text):
#     Off the buggy line: rejected — the text is left unchanged and no event
#     is emitted. On the buggy line: the line text is replaced, one edit event
#     carries the full new text, and originals edited away leave the mask.
#
#   inactivity: INACTIVITY_TIMEOUT_MS after the last *emitted* event, if the
#     mask still shows anything, the editor emits a single blur_everything
#     stamped exactly at last_event_t + timeout and clears the mask. Gestures
#     that emit nothing do not hold the mask open, mirroring the kernel's
#     replay rule, which can only see emitted events.

@dataclass(frozen=True)
class SimResult:
    events: list[InteractionEvent]
    final_buggy_line: str


def _hit(tokens: list[Token], col: int) -> Token | None:
    for tok in tokens:
        if tok.col_start <= col < tok.col_end:
            return tok
    return None


def simulate_script(snippet: Snippet, script: list[dict]) -> SimResult:
    events: list[InteractionEvent] = []
    tracking = TrackedLineState.initial(snippet)
    buggy_text = snippet.lines[snippet.buggy_line - 1]
    edited = False
    mask: set[int] = set()
    focus: int | None = None
    last_event_t = 0

    def emit(ev: InteractionEvent) -> None:
        nonlocal last_event_t
        events.append(ev)
        last_event_t = ev.t

    def run_timer_until(t: int) -> None:
        nonlocal focus
        if mask and t > last_event_t + INACTIVITY_TIMEOUT_MS:
            emit(InteractionEvent.blur_everything(last_event_t + INACTIVITY_TIMEOUT_MS))
            mask.clear()
            focus = None

    for gesture in script:
        t = gesture["t"]
        run_timer_until(t)
        action = gesture["action"]

        if action == "move":
            line, col = gesture["line"], gesture["col"]
            if edited and line == snippet.buggy_line:
                display = tokenize_line(buggy_text)
                hit = _hit(display, col)
                if hit is None:
                    continue
                by_col = {tt.col_start: tt.token_index for tt in tracking.tracked}
                new_focus = by_col.get(hit.col_start)
                if new_focus is None:
                    continue
                lo = max(hit.index - 3, 0)
                hi = min(hit.index + 3, len(display) - 1)
                visible = sorted(
                    by_col[d.col_start]
                    for d in display[lo : hi + 1]
                    if d.col_start in by_col
                )
            else:
                hit = _hit(snippet.line_tokens(line), col)
                if hit is None:
                    continue
                new_focus = hit.index
                visible = compute_window(snippet, hit.index)
            if new_focus == focus and new_focus in mask:
                continue
            emit(InteractionEvent.unblur(t, new_focus, visible, gesture.get("input")))
            mask.clear()
            mask.update(visible)
            focus = new_focus

        elif action == "edit":
            line, text = gesture["line"], gesture["text"]
            if line != snippet.buggy_line:
                continue  # rejected: text untouched, nothing emitted
            tracking = apply_edit(snippet, tracking, text, line)
            buggy_text = text
            edited = True
            mask.intersection_update(tracking.tracked_indices())
            emit(InteractionEvent.edit(t, line, text))

        elif action == "submit":
            return SimResult(events=events, final_buggy_line=buggy_text)

        else:
            raise ValueError(f"unknown gesture {action!r}")

    raise ValueError("script ended without a submit gesture")


def _col_of(snippet: Snippet, line: int, text: str, occurrence: int = 1) -> int:
    seen = 0
    for tok in snippet.line_tokens(line):
        if tok.text == text:
            seen += 1
            if seen == occurrence:
                return tok.col_start
    raise ValueError(f"no occurrence {occurrence} of {text!r} on line {line}")


def build_script(snippet: Snippet) -> list[dict]:
    fixed_tokens = tokenize_line(SESSION_FIXED_LINE)
    post_edit_hi = next(t.col_start for t in fixed_tokens if t.text == "hi")
    return [
        {"t": 0, "action": "move", "line": 1, "col": _col_of(snippet, 1, "static"), "input": "pointer"},
        {"t": 600, "action": "move", "line": 1, "col": _col_of(snippet, 1, "midpoint"), "input": "pointer"},
        {"t": 1400, "action": "move", "line": 3, "col": _col_of(snippet, 3, "span"), "input": "cursor"},
        {"t": 2600, "action": "move", "line": 4, "col": _col_of(snippet, 4, "hi"), "input": "pointer"},
        # same focus token, one column over: emits nothing
        {"t": 3300, "action": "move", "line": 4, "col": _col_of(snippet, 4, "hi") + 1, "input": "pointer"},
        # idle past the timeout: blur_everything at 5600 fires from the timer
        {"t": 7000, "action": "move", "line": 4, "col": _col_of(snippet, 4, "+", occurrence=2), "input": "cursor"},
        # indentation whitespace: emits nothing, does not restart the timer
        {"t": 7600, "action": "move", "line": 4, "col": 1, "input": "pointer"},
        {"t": 8200, "action": "edit", "line": 4, "text": SESSION_FIXED_LINE},
        # buggy line after the edit: window over displayed tokens, mapped back
        {"t": 8900, "action": "move", "line": 4, "col": post_edit_hi, "input": "pointer"},
        # edit off the buggy line: rejected, no event
        {"t": 9600, "action": "edit", "line": 5, "text": "    return mid + 1;"},
        {"t": 10400, "action": "move", "line": 5, "col": _col_of(snippet, 5, "return"), "input": "cursor"},
        # idle again: blur_everything at 13400, then submit
        {"t": 15000, "action": "submit", "label": "fix_done", "external_source": False},
    ]


def build_scripted_session() -> dict:
    snippet = session_snippet()
    script = build_script(snippet)
    sim = simulate_script(snippet, script)

    submit = script[-1]
    duration_ms = submit["t"]

    # the stream the editor emits must satisfy the service's strict validation
    validator = EventValidator(snippet)
    for ev in sim.events:
        validator.check(ev)

    record = SessionRecord(
        snippet_id=snippet.snippet_id,
        participant_id="golden",
        events=tuple(sim.events),
        label=submit["label"],
        final_buggy_line=sim.final_buggy_line,
        duration_ms=duration_ms,
    )
    attention = derive_attention(snippet, record)

    return {
        "format_version": FIXTURE_FORMAT_VERSION,
        "snippet": snippet_doc(snippet),
        "tokens": token_docs(snippet.tokens),
        "script": script,
        "expected_events": [event_to_doc(ev) for ev in sim.events],
        "expected_final_buggy_line": sim.final_buggy_line,
        "label": submit["label"],
        "duration_ms": duration_ms,
        "expected_weights": list(attention.weights),
    }


def render(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def main() -> None:
    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    for name, doc in [
        ("window_table.json", build_window_table()),
        ("scripted_session.json", build_scripted_session()),
    ]:
        path = FIXTURE_DIR / name
        path.write_text(render(doc), encoding="utf-8")
        print(f"wrote {path.relative_to(REPO_ROOT)}")


if __name__ == "__main__":
    main()
