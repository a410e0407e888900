"""Synthetic sessions, cohorts, and dumps used across the test suite.

The planted cohort gives exact, construction-known ground truth: every unblur
window holds exactly 7 tokens and every dwell is exactly 1000 ms with no
timeout gaps, so each (window, token) incidence contributes 1000 ms of mass
and a session's buggy-line share equals (#buggy windows) / (#windows) exactly.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

from codegaze import (
    InteractionEvent,
    ModelAttentionDump,
    SessionRecord,
    Snippet,
    compute_window,
    save_dump,
    save_snippet,
)
from codegaze.model_attention import TOKEN_LEVEL
from codegaze.sessions import session_to_doc

# --- random (structurally valid) sessions for fuzzing --------------------------


def line_interiors(snippet: Snippet, line: int) -> list[int]:
    """Cursor positions on `line` whose window is the full 7 tokens."""
    lo, hi = snippet.line_token_range(line)
    return [i for i in range(lo + 3, hi - 3)]


def fuzz_session(snippet: Snippet, rng: random.Random, allow_edits: bool = True) -> SessionRecord:
    """A random event log: valid windows, occasional blurs/edits/timeout gaps."""
    events: list[InteractionEvent] = []
    t = rng.randint(0, 500)
    remaining = [tok.text for tok in snippet.line_tokens(snippet.buggy_line)]
    edited = False
    for _ in range(rng.randint(1, 40)):
        roll = rng.random()
        if roll < 0.70 or not events:
            cursor = rng.randrange(len(snippet.tokens))
            if edited and snippet.tokens[cursor].line == snippet.buggy_line:
                cursor = 0  # stay off the rewritten line; tracking is exercised elsewhere
            events.append(
                InteractionEvent.unblur(t, cursor, compute_window(snippet, cursor))
            )
        elif roll < 0.85:
            events.append(InteractionEvent.blur_everything(t))
        elif allow_edits and len(remaining) > 1:
            drop = rng.randrange(len(remaining))
            remaining = remaining[:drop] + remaining[drop + 1 :]
            events.append(
                InteractionEvent.edit(t, snippet.buggy_line, " ".join(remaining))
            )
            edited = True
        t += rng.choice([0, 50, 200, 900, 1500, 3500])
    duration = t + rng.randint(1, 2000)
    return SessionRecord(
        snippet_id=snippet.snippet_id,
        participant_id=f"fuzz{rng.randint(0, 999)}",
        events=tuple(events),
        label="cannot_fix",
        final_buggy_line=" ".join(remaining),
        duration_ms=duration,
    )


# --- planted-archetype cohort ---------------------------------------------------

COHORT_SOURCES = {
    "bitcount": (
        """\
public class BitCount {
    public static int bitcount(int n) {
        int count = 0;
        while (n != 0) {
            n = n ^ (n - 1);
            count = count + 1;
        }
        return count;
    }
}""",
        5,
        "count set bits of an integer",
    ),
    "gcdloop": (
        """\
public class GcdLoop {
    public static int gcd(int a, int b) {
        while (b != 0) {
            int temp = b % a;
            b = a;
            a = temp;
        }
        return a;
    }
}""",
        4,
        "greatest common divisor by repeated remainder",
    ),
    "sqrtnewton": (
        """\
public class SqrtNewton {
    public static double sqrt(double x, double epsilon) {
        double approx = x / 2.0;
        while (Math.abs(x - approx * approx) > epsilon) {
            approx = 0.5 * (approx + x / approx);
        }
        return x - approx;
    }
}""",
        4,
        "square root by Newton iteration",
    ),
    "maxsublist": (
        """\
public class MaxSublist {
    public static int maxSum(int[] values) {
        int best = 0;
        int current = 0;
        for (int value : values) {
            current = Math.max(value, current + value);
            best = Math.max(best, current);
        }
        return current;
    }
}""",
        6,
        "maximum sublist sum",
    ),
}

ARCHETYPE_BUGGY_WINDOWS = {"deep": 14, "skim": 5}
TOTAL_WINDOWS = 20
DWELL_MS = 1000

DEEP_PARTICIPANTS = ["deep1", "deep2", "deep3", "deep4"]
SKIM_PARTICIPANTS = ["skim1", "skim2", "skim3", "skim4"]


def build_corpus() -> dict[str, Snippet]:
    return {
        sid: Snippet.from_source(sid, source, buggy, desc)
        for sid, (source, buggy, desc) in COHORT_SOURCES.items()
    }


def _context_lines(snippet: Snippet) -> list[int]:
    """Lines (not the buggy one) with at least one full-window cursor position."""
    return [
        line
        for line in range(1, snippet.line_count + 1)
        if line != snippet.buggy_line and line_interiors(snippet, line)
    ]


def planted_session(snippet: Snippet, participant_id: str, archetype: str, flag_external: bool = False) -> SessionRecord:
    """One session with an exact buggy-line share of (buggy windows) / 20.

    All participants of an archetype walk the same line schedule; the cursor
    within each line is jittered per participant so vectors differ while
    staying highly rank-correlated within the archetype.
    """
    rng = random.Random(f"{snippet.snippet_id}:{participant_id}")
    n_buggy = ARCHETYPE_BUGGY_WINDOWS[archetype]
    buggy_cursors = line_interiors(snippet, snippet.buggy_line)
    assert buggy_cursors, f"buggy line of {snippet.snippet_id} has no interior cursor"
    context = _context_lines(snippet)
    assert len(context) >= 2, f"{snippet.snippet_id} lacks context lines with full windows"

    # Deterministic schedule: buggy windows first, then context lines round-robin.
    schedule: list[int] = []
    for k in range(n_buggy):
        schedule.append(buggy_cursors[k % len(buggy_cursors)])
    for k in range(TOTAL_WINDOWS - n_buggy):
        line = context[k % len(context)]
        interiors = line_interiors(snippet, line)
        schedule.append(interiors[k % len(interiors)])
    # Per-participant jitter: nudge two schedule slots to a neighboring cursor
    # on the same line (keeps the window full and the line membership intact).
    for slot in rng.sample(range(TOTAL_WINDOWS), 2):
        cursor = schedule[slot]
        line = snippet.tokens[cursor].line
        interiors = line_interiors(snippet, line)
        if len(interiors) > 1:
            schedule[slot] = rng.choice([c for c in interiors if c != cursor])

    events = [
        InteractionEvent.unblur(slot * DWELL_MS, cursor, compute_window(snippet, cursor))
        for slot, cursor in enumerate(schedule)
    ]
    end = TOTAL_WINDOWS * DWELL_MS
    events.append(InteractionEvent.blur_everything(end))
    # Real fix attempt after everything is blurred: untracking clips nothing,
    # so the exact share arithmetic above is unaffected.
    buggy_tokens = [tok.text for tok in snippet.line_tokens(snippet.buggy_line)]
    final_line = " ".join(buggy_tokens[:-2] + ["fixed", buggy_tokens[-1]])
    events.append(InteractionEvent.edit(end + 500, snippet.buggy_line, final_line))
    return SessionRecord(
        snippet_id=snippet.snippet_id,
        participant_id=participant_id,
        events=tuple(events),
        label="fix_done",
        final_buggy_line=final_line,
        duration_ms=end + 1000,
        validity="external_source" if flag_external else "valid",
    )


def build_sessions(corpus: dict[str, Snippet]) -> list[SessionRecord]:
    """4 deep + 4 skim participants over every snippet, plus 2 flagged extras."""
    sessions = []
    for sid in sorted(corpus):
        snippet = corpus[sid]
        for pid in DEEP_PARTICIPANTS:
            sessions.append(planted_session(snippet, pid, "deep"))
        for pid in SKIM_PARTICIPANTS:
            sessions.append(planted_session(snippet, pid, "skim"))
    first = corpus[sorted(corpus)[0]]
    sessions.append(planted_session(first, "flagged1", "deep", flag_external=True))
    sessions.append(planted_session(first, "flagged2", "skim", flag_external=True))
    return sessions


def build_dumps(corpus: dict[str, Snippet]) -> list[ModelAttentionDump]:
    """Two token-level model dumps per snippet: buggy-leaning and uniform-ish."""
    dumps = []
    for sid in sorted(corpus):
        snippet = corpus[sid]
        n = len(snippet.tokens)
        buggy = snippet.buggy_line_indices()
        rng = random.Random(f"dump:{sid}")
        hot = tuple(
            (4.0 if i in buggy else 0.5) + rng.random() * 0.1 for i in range(n)
        )
        flat = tuple(1.0 + rng.random() * 0.05 for i in range(n))
        dumps.append(
            ModelAttentionDump(sid, "hotmodel", TOKEN_LEVEL, n, (hot,), copy_steps=(hot,))
        )
        dumps.append(ModelAttentionDump(sid, "flatmodel", TOKEN_LEVEL, n, (flat, flat)))
    return dumps


def write_cohort(root: Path, with_dumps: bool = True) -> dict:
    """Materialize corpus/sessions/dumps/manifest under `root`; returns paths."""
    corpus = build_corpus()
    corpus_dir = root / "corpus"
    sessions_dir = root / "sessions"
    out_dir = root / "reports"
    corpus_dir.mkdir(parents=True, exist_ok=True)
    sessions_dir.mkdir(parents=True, exist_ok=True)
    for sid, snippet in corpus.items():
        save_snippet(snippet, corpus_dir / f"{sid}.json")
    sessions = build_sessions(corpus)
    for record in sessions:
        doc = session_to_doc(record)
        path = sessions_dir / f"{record.participant_id}__{record.snippet_id}.json"
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    dumps_dir = None
    if with_dumps:
        dumps_dir = root / "dumps"
        dumps_dir.mkdir(parents=True, exist_ok=True)
        for dump in build_dumps(corpus):
            save_dump(dump, dumps_dir / f"{dump.snippet_id}__{dump.model_id}.json")
    manifest = {
        "format_version": 1,
        "corpus": "corpus",
        "sessions": "sessions",
        "out": "reports",
        "alpha": 0.05,
        "n_bins": 20,
        "seed": 7,
    }
    if with_dumps:
        manifest["dumps"] = "dumps"
    manifest_path = root / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return {
        "corpus": corpus_dir,
        "sessions": sessions_dir,
        "dumps": dumps_dir,
        "out": out_dir,
        "manifest": manifest_path,
        "corpus_objects": corpus,
        "session_objects": sessions,
    }
