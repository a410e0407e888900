"""Interaction-event log, blur-editor visibility state machine, and attention derivation.

A session is a sequence of timestamped events (unblur / blur_everything / edit)
plus a submission. A token's attention weight is the total time it was visible,
normalized by the session duration. All interval arithmetic is integer
milliseconds; the single float division happens at the end, which makes replay
bit-identical across runs and platforms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable

from .tokens import AttentionVector, Snippet, Token, compute_window, tokenize_line

SESSION_FORMAT_VERSION = 1

INACTIVITY_TIMEOUT_MS = 3000
MAX_WINDOW_TOKENS = 7

UNBLUR = "unblur"
BLUR_EVERYTHING = "blur_everything"
EDIT = "edit"

FIX_DONE = "fix_done"
CANNOT_FIX = "cannot_fix"

VALIDITY_VALID = "valid"
VALIDITY_EXTERNAL = "external_source"
VALIDITY_OUTLIER = "outlier"


class MalformedLog(ValueError):
    pass


class EmptySession(ValueError):
    pass


class EditOutsideBuggyLine(ValueError):
    pass


@dataclass(frozen=True)
class InteractionEvent:
    """One recorded interaction. Fields beyond (t, kind) depend on the kind.

    unblur: `focus` is the cursor token index, `visible` the unblurred token
    indices (sorted, one line, at most 7, focus included). edit: `line` is the
    1-based edited line and `text` the full new line content. `input_source`
    optionally tags unblur events as pointer- or cursor-driven; analysis
    ignores it.
    """

    t: int
    kind: str
    focus: int | None = None
    visible: tuple[int, ...] = ()
    line: int | None = None
    text: str | None = None
    input_source: str | None = None

    @staticmethod
    def unblur(t: int, focus: int, visible: Iterable[int], input_source: str | None = None) -> "InteractionEvent":
        return InteractionEvent(t=t, kind=UNBLUR, focus=focus, visible=tuple(sorted(visible)), input_source=input_source)

    @staticmethod
    def blur_everything(t: int) -> "InteractionEvent":
        return InteractionEvent(t=t, kind=BLUR_EVERYTHING)

    @staticmethod
    def edit(t: int, line: int, text: str) -> "InteractionEvent":
        return InteractionEvent(t=t, kind=EDIT, line=line, text=text)


@dataclass(frozen=True)
class SessionRecord:
    """One completed bug-fixing session (events plus submission outcome).

    `duration_ms` is the client-relative timestamp of the submission; it is the
    normalization constant for attention weights.
    """

    snippet_id: str
    participant_id: str
    events: tuple[InteractionEvent, ...]
    label: str
    final_buggy_line: str
    duration_ms: int
    validity: str = VALIDITY_VALID

    def __post_init__(self) -> None:
        if self.label not in (FIX_DONE, CANNOT_FIX):
            raise ValueError(f"unknown label {self.label!r}")
        if self.validity not in (VALIDITY_VALID, VALIDITY_EXTERNAL, VALIDITY_OUTLIER):
            raise ValueError(f"unknown validity {self.validity!r}")
        if self.label == FIX_DONE and not self.final_buggy_line:
            raise ValueError("fix_done submission requires a non-empty final line")


@dataclass(frozen=True)
class TrackedToken:
    """An original buggy-line token still present in the edited line."""

    token_index: int
    text: str
    col_start: int
    col_end: int


@dataclass(frozen=True)
class TrackedLineState:
    """Which original buggy-line tokens survive the edits made so far.

    Tokens removed or altered by an edit become permanently untracked; tokens
    inserted by edits are never represented here at all.
    """

    buggy_line: int
    tracked: tuple[TrackedToken, ...]
    untracked: frozenset[int] = frozenset()

    @staticmethod
    def initial(snippet: Snippet) -> "TrackedLineState":
        toks = snippet.line_tokens(snippet.buggy_line)
        return TrackedLineState(
            buggy_line=snippet.buggy_line,
            tracked=tuple(
                TrackedToken(t.index, t.text, t.col_start, t.col_end) for t in toks
            ),
        )

    def tracked_indices(self) -> frozenset[int]:
        return frozenset(t.token_index for t in self.tracked)


def _lcs_match(old: list[str], new: list[str]) -> list[tuple[int, int]]:
    """Longest common subsequence of exact texts; leftmost alignment on ties."""
    n, m = len(old), len(new)
    dp = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        for j in range(m - 1, -1, -1):
            if old[i] == new[j]:
                dp[i][j] = dp[i + 1][j + 1] + 1
            else:
                dp[i][j] = max(dp[i + 1][j], dp[i][j + 1])
    pairs: list[tuple[int, int]] = []
    i = j = 0
    while i < n and j < m:
        if old[i] == new[j] and dp[i][j] == dp[i + 1][j + 1] + 1:
            pairs.append((i, j))
            i += 1
            j += 1
        elif dp[i + 1][j] >= dp[i][j + 1]:
            i += 1
        else:
            j += 1
    return pairs


def apply_edit(snippet: Snippet, state: TrackedLineState, edit_payload: str, line: int | None = None) -> TrackedLineState:
    """Re-match tracked originals against the edited line text.

    Originals that still appear, in order, as an exact-text subsequence keep
    their tracking (with columns updated to the new line); the rest become
    permanently untracked. Raises EditOutsideBuggyLine when the edit names a
    different line or spans lines.
    """
    if line is not None and line != snippet.buggy_line:
        raise EditOutsideBuggyLine(f"edit targeted line {line}, buggy line is {snippet.buggy_line}")
    if "\n" in edit_payload:
        raise EditOutsideBuggyLine("edit payload spans multiple lines")
    new_tokens = tokenize_line(edit_payload)
    pairs = _lcs_match([t.text for t in state.tracked], [t.text for t in new_tokens])
    matched_old = {i for i, _ in pairs}
    tracked = tuple(
        TrackedToken(
            state.tracked[i].token_index,
            state.tracked[i].text,
            new_tokens[j].col_start,
            new_tokens[j].col_end,
        )
        for i, j in pairs
    )
    dropped = frozenset(
        t.token_index for i, t in enumerate(state.tracked) if i not in matched_old
    )
    return TrackedLineState(
        buggy_line=state.buggy_line,
        tracked=tracked,
        untracked=state.untracked | dropped,
    )


@dataclass
class VisibilityTimeline:
    """Per original token: disjoint, merged [start, end) visibility intervals in ms."""

    snippet_id: str
    duration_ms: int
    intervals: dict[int, list[tuple[int, int]]] = field(default_factory=dict)
    final_tracking: TrackedLineState | None = None

    def visible_ms(self, token_index: int) -> int:
        return sum(e - s for s, e in self.intervals.get(token_index, []))

    def total_mass_ms(self) -> int:
        return sum(e - s for ivs in self.intervals.values() for s, e in ivs)


def _merge(intervals: list[tuple[int, int]]) -> list[tuple[int, int]]:
    merged: list[tuple[int, int]] = []
    for s, e in intervals:
        if e <= s:
            continue
        if merged and s <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], e))
        else:
            merged.append((s, e))
    return merged


def validate_events(snippet: Snippet, events: Iterable[InteractionEvent]) -> None:
    """Structural event checks: timestamp order and unblur set shape."""
    prev_t = 0
    for k, ev in enumerate(events):
        if ev.t < prev_t:
            raise MalformedLog(f"event {k} timestamp {ev.t} decreases")
        prev_t = ev.t
        if ev.kind == UNBLUR:
            if not ev.visible:
                raise MalformedLog(f"event {k}: unblur with empty visible set")
            if len(ev.visible) > MAX_WINDOW_TOKENS:
                raise MalformedLog(f"event {k}: {len(ev.visible)} visible tokens exceeds {MAX_WINDOW_TOKENS}")
            if ev.focus not in ev.visible:
                raise MalformedLog(f"event {k}: focus token not in visible set")
            lines = set()
            for i in ev.visible:
                if not 0 <= i < len(snippet.tokens):
                    raise MalformedLog(f"event {k}: token index {i} outside snippet")
                lines.add(snippet.tokens[i].line)
            if len(lines) > 1:
                raise MalformedLog(f"event {k}: visible set spans lines {sorted(lines)}")
        elif ev.kind == EDIT:
            if ev.text is None:
                raise MalformedLog(f"event {k}: edit without text")
        elif ev.kind != BLUR_EVERYTHING:
            raise MalformedLog(f"event {k}: unknown kind {ev.kind!r}")


def build_timeline(snippet: Snippet, events: Iterable[InteractionEvent], duration_ms: int) -> VisibilityTimeline:
    """Sweep the event log into per-token visibility intervals.

    A token is visible from each unblur event that includes it until the
    earliest of: the next unblur whose set excludes it, a blur_everything
    event, 3000 ms after the last event (the inactivity timeout is recomputed
    here even if the client also emitted it), or session end. Buggy-line
    tokens edited away stop accruing at the edit timestamp, permanently.
    """
    events = list(events)
    validate_events(snippet, events)
    if duration_ms <= 0:
        raise EmptySession(f"non-positive session duration {duration_ms}")

    tracking = TrackedLineState.initial(snippet)
    raw: dict[int, list[tuple[int, int]]] = {}
    open_since: dict[int, int] = {}
    last_activity = 0

    def close(idx: int, at: int) -> None:
        start = open_since.pop(idx)
        raw.setdefault(idx, []).append((start, min(at, duration_ms)))

    def close_all(at: int) -> None:
        for idx in list(open_since):
            close(idx, at)

    for ev in events:
        if ev.t > duration_ms:
            raise MalformedLog(f"event at {ev.t} ms is past session end {duration_ms} ms")
        if open_since and ev.t > last_activity + INACTIVITY_TIMEOUT_MS:
            close_all(last_activity + INACTIVITY_TIMEOUT_MS)
        if ev.kind == UNBLUR:
            effective = [i for i in ev.visible if i not in tracking.untracked]
            keep = set(effective)
            for idx in list(open_since):
                if idx not in keep:
                    close(idx, ev.t)
            for idx in effective:
                if idx not in open_since:
                    open_since[idx] = ev.t
        elif ev.kind == BLUR_EVERYTHING:
            close_all(ev.t)
        elif ev.kind == EDIT:
            before = tracking.untracked
            tracking = apply_edit(snippet, tracking, ev.text or "", ev.line)
            for idx in tracking.untracked - before:
                if idx in open_since:
                    close(idx, ev.t)
        last_activity = ev.t

    if open_since:
        close_all(min(last_activity + INACTIVITY_TIMEOUT_MS, duration_ms))

    merged = {idx: _merge(ivs) for idx, ivs in raw.items()}
    return VisibilityTimeline(
        snippet_id=snippet.snippet_id,
        duration_ms=duration_ms,
        intervals={idx: ivs for idx, ivs in merged.items() if ivs},
        final_tracking=tracking,
    )


def attention_from_timeline(snippet: Snippet, timeline: VisibilityTimeline) -> AttentionVector:
    weights = tuple(
        timeline.visible_ms(i) / timeline.duration_ms for i in range(len(snippet.tokens))
    )
    return AttentionVector(snippet_id=snippet.snippet_id, weights=weights)


def derive_attention(snippet: Snippet, session: SessionRecord) -> AttentionVector:
    """Definition of developer attention: visible time per token over total time."""
    if not session.events:
        raise EmptySession(f"session for {session.snippet_id!r} has no events")
    if session.snippet_id != snippet.snippet_id:
        raise ValueError(f"session is for {session.snippet_id!r}, not {snippet.snippet_id!r}")
    timeline = build_timeline(snippet, session.events, session.duration_ms)
    return attention_from_timeline(snippet, timeline)


def replay(snippet: Snippet, session: SessionRecord) -> AttentionVector:
    """Recompute attention from a stored log; identical to derive_attention."""
    return derive_attention(snippet, session)


class EventValidator:
    """Incremental strict validation of a live event stream, server-side.

    Beyond the structural rules build_timeline enforces, this checks the
    window law: before any edit, an unblur's visible set must equal
    compute_window(focus) exactly; after an edit has rewritten the buggy line,
    buggy-line unblurs may reference any subset of still-tracked originals
    (the edited line's geometry is client-side), while unblurs on untouched
    lines must still match compute_window.
    """

    def __init__(self, snippet: Snippet) -> None:
        self.snippet = snippet
        self.last_t = 0
        self.edit_seen = False
        self.tracking = TrackedLineState.initial(snippet)
        self.event_count = 0

    def clone(self) -> "EventValidator":
        """Snapshot for all-or-nothing batch validation (state is immutable)."""
        other = EventValidator(self.snippet)
        other.last_t = self.last_t
        other.edit_seen = self.edit_seen
        other.tracking = self.tracking
        other.event_count = self.event_count
        return other

    def check(self, ev: InteractionEvent) -> None:
        if ev.t < self.last_t:
            raise MalformedLog(f"timestamp {ev.t} before previous event at {self.last_t}")
        if ev.kind == UNBLUR:
            self._check_unblur(ev)
        elif ev.kind == EDIT:
            self.tracking = apply_edit(self.snippet, self.tracking, ev.text or "", ev.line)
            self.edit_seen = True
        elif ev.kind != BLUR_EVERYTHING:
            raise MalformedLog(f"unknown event kind {ev.kind!r}")
        self.last_t = ev.t
        self.event_count += 1

    def _check_unblur(self, ev: InteractionEvent) -> None:
        if not ev.visible:
            raise MalformedLog("unblur with empty visible set")
        if len(ev.visible) > MAX_WINDOW_TOKENS:
            raise MalformedLog(f"{len(ev.visible)} visible tokens exceeds {MAX_WINDOW_TOKENS}")
        for i in ev.visible:
            if not 0 <= i < len(self.snippet.tokens):
                raise MalformedLog(f"token index {i} outside snippet")
        if ev.focus not in ev.visible:
            raise MalformedLog("focus token not in visible set")
        focus_line = self.snippet.tokens[ev.focus].line
        if self.edit_seen and focus_line == self.snippet.buggy_line:
            tracked = self.tracking.tracked_indices()
            stray = [i for i in ev.visible if i not in tracked]
            if stray:
                raise MalformedLog(f"unblur references edited-away tokens {stray}")
        else:
            expected = tuple(compute_window(self.snippet, ev.focus))
            if ev.visible != expected:
                raise MalformedLog(
                    f"visible set {list(ev.visible)} is not the window {list(expected)} "
                    f"of focus token {ev.focus}"
                )


# --- serialization -----------------------------------------------------------

def event_to_doc(ev: InteractionEvent) -> dict:
    doc: dict = {"t": ev.t, "kind": ev.kind}
    if ev.kind == UNBLUR:
        doc["focus"] = ev.focus
        doc["visible"] = list(ev.visible)
        if ev.input_source is not None:
            doc["input"] = ev.input_source
    elif ev.kind == EDIT:
        doc["line"] = ev.line
        doc["text"] = ev.text
    return doc


def event_from_doc(doc: dict) -> InteractionEvent:
    kind = doc.get("kind")
    t = doc.get("t")
    if not isinstance(t, int) or t < 0:
        raise MalformedLog(f"event timestamp must be a non-negative integer, got {t!r}")
    if kind == UNBLUR:
        return InteractionEvent(
            t=t,
            kind=UNBLUR,
            focus=doc["focus"],
            visible=tuple(sorted(doc["visible"])),
            input_source=doc.get("input"),
        )
    if kind == BLUR_EVERYTHING:
        return InteractionEvent(t=t, kind=BLUR_EVERYTHING)
    if kind == EDIT:
        return InteractionEvent(t=t, kind=EDIT, line=doc.get("line"), text=doc["text"])
    raise MalformedLog(f"unknown event kind {kind!r}")


def session_to_doc(session: SessionRecord) -> dict:
    return {
        "format_version": SESSION_FORMAT_VERSION,
        "snippet_id": session.snippet_id,
        "participant_id": session.participant_id,
        "duration_ms": session.duration_ms,
        "label": session.label,
        "final_buggy_line": session.final_buggy_line,
        "validity": session.validity,
        "events": [event_to_doc(ev) for ev in session.events],
    }


def session_from_doc(doc: dict) -> SessionRecord:
    version = doc.get("format_version")
    if version != SESSION_FORMAT_VERSION:
        raise MalformedLog(f"unsupported session format_version {version!r}")
    try:
        return SessionRecord(
            snippet_id=doc["snippet_id"],
            participant_id=doc["participant_id"],
            events=tuple(event_from_doc(e) for e in doc["events"]),
            label=doc["label"],
            final_buggy_line=doc["final_buggy_line"],
            duration_ms=doc["duration_ms"],
            validity=doc.get("validity", VALIDITY_VALID),
        )
    except KeyError as exc:
        raise MalformedLog(f"session document missing field {exc}") from None


def save_session(session: SessionRecord, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(session_to_doc(session), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def load_session(path: str | Path) -> SessionRecord:
    return session_from_doc(json.loads(Path(path).read_text(encoding="utf-8")))


def load_sessions(path: str | Path) -> list[SessionRecord]:
    """Load sessions from a directory of *.json files or a .jsonl container."""
    p = Path(path)
    out: list[SessionRecord] = []
    if p.is_dir():
        for f in sorted(p.glob("*.json")):
            out.append(load_session(f))
        for f in sorted(p.glob("*.jsonl")):
            out.extend(_load_jsonl(f))
    elif p.is_file():
        if p.suffix == ".jsonl":
            out.extend(_load_jsonl(p))
        else:
            out.append(load_session(p))
    else:
        raise MalformedLog(f"sessions path {p} does not exist")
    return out


def _load_jsonl(path: Path) -> list[SessionRecord]:
    out = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            out.append(session_from_doc(json.loads(line)))
        except json.JSONDecodeError as exc:
            raise MalformedLog(f"{path}:{lineno}: invalid JSON ({exc})") from exc
    return out


def with_events(session: SessionRecord, events: Iterable[InteractionEvent]) -> SessionRecord:
    return replace(session, events=tuple(events))
