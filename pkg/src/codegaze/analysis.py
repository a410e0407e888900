"""Comparative statistics over attention vectors and session logs.

Implements rank correlation between attention vectors, Jensen-Shannon
divergence, buggy-line/context attention shares, deviation-from-uniform per
token class, time-binned session profiles, area-of-interest validation shares,
and the shrunken-window sensitivity simulation.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Mapping, NamedTuple, Sequence

import numpy as np
from scipy import stats

from .sessions import (
    UNBLUR,
    EDIT,
    EmptySession,
    InteractionEvent,
    SessionRecord,
    build_timeline,
    derive_attention,
)
from .tokens import AttentionVector, Snippet, TokenClass

PAIR_DEV_DEV = "dev-dev"
PAIR_DEV_MODEL = "dev-model"
PAIR_MODEL_MODEL = "model-model"
PAIR_LENGTH_CONTEXT = "length-context"
PAIR_KINDS = (PAIR_DEV_DEV, PAIR_DEV_MODEL, PAIR_MODEL_MODEL, PAIR_LENGTH_CONTEXT)

DEFAULT_ALPHA = 0.05
DEFAULT_BINS = 20


class DegenerateInput(ValueError):
    pass


class ZeroMass(ValueError):
    pass


class EmptyClass(ValueError):
    pass


@dataclass(frozen=True)
class CorrelationResult:
    rho: float
    p_value: float
    n: int
    pair_kind: str

    def __post_init__(self) -> None:
        if not -1.0 <= self.rho <= 1.0:
            raise ValueError(f"rho {self.rho} outside [-1, 1]")
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"p_value {self.p_value} outside [0, 1]")
        if self.pair_kind not in PAIR_KINDS:
            raise ValueError(f"unknown pair_kind {self.pair_kind!r}")


def _weights(v: "AttentionVector | Sequence[float]") -> Sequence[float]:
    return v.weights if isinstance(v, AttentionVector) else v


def spearman(
    a: "AttentionVector | Sequence[float]",
    b: "AttentionVector | Sequence[float]",
    pair_kind: str = PAIR_DEV_DEV,
) -> CorrelationResult:
    """Spearman rank correlation with average-tie ranks and t-approximated p.

    Pearson is evaluated on the rank vectors with the symmetric covariance
    formula, so spearman(a, b) and spearman(b, a) are bit-identical. Constant
    inputs have no defined rank correlation and raise DegenerateInput rather
    than being zeroed.
    """
    xs, ys = _weights(a), _weights(b)
    if len(xs) != len(ys):
        raise ValueError(f"length mismatch: {len(xs)} vs {len(ys)}")
    n = len(xs)
    if n < 3:
        raise DegenerateInput(f"need at least 3 samples, got {n}")
    if min(xs) == max(xs) or min(ys) == max(ys):
        raise DegenerateInput("constant vector has no rank correlation")
    rx = stats.rankdata(xs)
    ry = stats.rankdata(ys)
    mx, my = rx.mean(), ry.mean()
    dx, dy = rx - mx, ry - my
    denom = math.sqrt(float(np.dot(dx, dx)) * float(np.dot(dy, dy)))
    rho = float(np.dot(dx, dy)) / denom
    rho = max(-1.0, min(1.0, rho))
    if abs(rho) == 1.0:
        p = 0.0
    else:
        t = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
        p = 2.0 * float(stats.t.sf(abs(t), n - 2))
    return CorrelationResult(rho=rho, p_value=min(p, 1.0), n=n, pair_kind=pair_kind)


def jsd(a: "AttentionVector | Sequence[float]", b: "AttentionVector | Sequence[float]") -> float:
    """Jensen-Shannon divergence (base 2, range [0, 1]) of L1-normalized vectors."""
    xs, ys = _weights(a), _weights(b)
    if len(xs) != len(ys):
        raise ValueError(f"length mismatch: {len(xs)} vs {len(ys)}")
    sx, sy = sum(xs), sum(ys)
    if sx <= 0 or sy <= 0:
        raise ZeroMass("cannot normalize a vector with zero total attention")
    p = [x / sx for x in xs]
    q = [y / sy for y in ys]
    kl_p = 0.0
    kl_q = 0.0
    for pi, qi in zip(p, q):
        mi = (pi + qi) / 2.0
        if pi > 0.0:
            kl_p += pi * math.log2(pi / mi)
        if qi > 0.0:
            kl_q += qi * math.log2(qi / mi)
    return 0.5 * kl_p + 0.5 * kl_q


class FilterOutcome(NamedTuple):
    kept: list[CorrelationResult]
    discarded: int


def significance_filter(results: Iterable[CorrelationResult], alpha: float = DEFAULT_ALPHA) -> FilterOutcome:
    """Keep results with p_value <= alpha; report how many were discarded."""
    kept = []
    discarded = 0
    for r in results:
        if r.p_value <= alpha:
            kept.append(r)
        else:
            discarded += 1
    return FilterOutcome(kept=kept, discarded=discarded)


def _mass(v: AttentionVector, indices: Iterable[int]) -> float:
    return sum(v.weights[i] for i in sorted(indices))


def _total(v: AttentionVector) -> float:
    total = sum(v.weights)
    if total <= 0:
        raise ZeroMass("attention vector has zero total mass")
    return total


def buggy_line_share(snippet: Snippet, v: AttentionVector) -> float:
    """Fraction of total attention mass on buggy-line tokens."""
    return _mass(v, snippet.buggy_line_indices()) / _total(v)


def context_share(snippet: Snippet, v: AttentionVector) -> float:
    return 1.0 - buggy_line_share(snippet, v)


def aoi_share(snippet: Snippet, v: AttentionVector, aoi_lines: Iterable[int]) -> float:
    """Fraction of total attention mass on tokens of the area-of-interest lines."""
    lines = set(aoi_lines)
    if not lines:
        raise ValueError("aoi_lines is empty")
    bad = [ln for ln in lines if not 1 <= ln <= snippet.line_count]
    if bad:
        raise ValueError(f"aoi lines {sorted(bad)} outside snippet (1..{snippet.line_count})")
    indices = [t.index for t in snippet.tokens if t.line in lines]
    return _mass(v, indices) / _total(v)


def length_context_correlation(pairs: Sequence[tuple[int, float]]) -> CorrelationResult:
    """Spearman between snippet token counts and per-session context shares."""
    if len(pairs) < 3:
        raise DegenerateInput(f"need at least 3 sessions, got {len(pairs)}")
    lengths = [float(n) for n, _ in pairs]
    shares = [s for _, s in pairs]
    return spearman(lengths, shares, pair_kind=PAIR_LENGTH_CONTEXT)


# --- deviation from uniform ---------------------------------------------------

ClassFilter = "TokenClass | Iterable[int] | Callable"


def _class_indices(snippet: Snippet, class_filter) -> list[int]:
    if isinstance(class_filter, TokenClass):
        return [t.index for t in snippet.tokens if t.token_class is class_filter]
    if callable(class_filter):
        return [t.index for t in snippet.tokens if class_filter(t)]
    return sorted(set(class_filter))


def dfu(snippet: Snippet, v: AttentionVector, class_filter) -> float:
    """Attention share of a token group over its token-count share.

    1.0 means the group draws exactly its uniform-attention allotment. The
    group may be given as a TokenClass, a token predicate, or explicit indices.
    """
    indices = _class_indices(snippet, class_filter)
    if not indices:
        raise EmptyClass("token group is empty")
    bad = [i for i in indices if not 0 <= i < len(snippet.tokens)]
    if bad:
        raise ValueError(f"token indices {bad} outside snippet")
    total = _total(v)
    attention_share = _mass(v, indices) / total
    token_share = len(indices) / len(snippet.tokens)
    return attention_share / token_share


@dataclass(frozen=True)
class DfuEntry:
    dfu: float
    token_share: float
    attention_share: float
    token_count: int


@dataclass(frozen=True)
class DfuReport:
    snippet_id: str
    entries: Mapping[str, DfuEntry]


ALL_TOKENS_GROUP = "all"


def dfu_report(snippet: Snippet, v: AttentionVector, groups: Mapping[str, Iterable[int]] | None = None) -> DfuReport:
    """Per-group deviation from uniform; defaults to the token classes present.

    Always includes the all-tokens group, whose value is exactly 1.
    """
    total = _total(v)
    if groups is None:
        groups = {}
        for cls in TokenClass:
            indices = [t.index for t in snippet.tokens if t.token_class is cls]
            if indices:
                groups[cls.value] = indices
    entries: dict[str, DfuEntry] = {}
    for name, raw in sorted(groups.items()):
        indices = sorted(set(raw))
        if not indices:
            raise EmptyClass(f"group {name!r} is empty")
        mass = _mass(v, indices)
        entries[name] = DfuEntry(
            dfu=(mass / total) / (len(indices) / len(snippet.tokens)),
            token_share=len(indices) / len(snippet.tokens),
            attention_share=mass / total,
            token_count=len(indices),
        )
    all_indices = range(len(snippet.tokens))
    entries[ALL_TOKENS_GROUP] = DfuEntry(
        dfu=(_mass(v, all_indices) / total) / 1.0,
        token_share=1.0,
        attention_share=_mass(v, all_indices) / total,
        token_count=len(snippet.tokens),
    )
    return DfuReport(snippet_id=snippet.snippet_id, entries=entries)


# --- temporal profile ---------------------------------------------------------

@dataclass(frozen=True)
class BinStats:
    buggy_fraction: float
    context_fraction: float
    switch_count: int
    edit_count: int
    unblur_count: int
    buggy_mass_ms: float = 0.0
    context_mass_ms: float = 0.0


@dataclass(frozen=True)
class TemporalProfile:
    snippet_id: str
    n_bins: int
    bins: tuple[BinStats, ...]

    @property
    def switch_total(self) -> int:
        return sum(b.switch_count for b in self.bins)

    @property
    def total_mass_ms(self) -> float:
        return math.fsum(b.buggy_mass_ms + b.context_mass_ms for b in self.bins)


def _bin_of(t: int, duration: int, n_bins: int) -> int:
    return min(t * n_bins // duration, n_bins - 1)


def temporal_profile(snippet: Snippet, session: SessionRecord, n_bins: int = DEFAULT_BINS) -> TemporalProfile:
    """Split the session into n equal time bins and profile each.

    Visibility intervals are split proportionally at bin boundaries. A switch
    is a pair of consecutive unblur events whose focus tokens differ in
    buggy-line membership; it is counted in the bin of the later event.
    """
    if not session.events:
        raise EmptySession(f"session for {session.snippet_id!r} has no events")
    if n_bins < 1:
        raise ValueError(f"n_bins must be >= 1, got {n_bins}")
    timeline = build_timeline(snippet, session.events, session.duration_ms)
    duration = timeline.duration_ms
    buggy = snippet.buggy_line_indices()

    buggy_mass = [0.0] * n_bins
    context_mass = [0.0] * n_bins
    for idx, intervals in timeline.intervals.items():
        target = buggy_mass if idx in buggy else context_mass
        for s, e in intervals:
            k_lo = _bin_of(s, duration, n_bins)
            # bin holding the sup of the half-open interval, not of its last ms:
            # e*n/duration exactly on a boundary belongs to the previous bin
            k_hi = min((e * n_bins - 1) // duration, n_bins - 1)
            for k in range(k_lo, k_hi + 1):
                lo = duration * k / n_bins
                hi = duration * (k + 1) / n_bins
                piece = min(float(e), hi) - max(float(s), lo)
                if piece > 0:
                    target[k] += piece

    switch = [0] * n_bins
    edits = [0] * n_bins
    unblurs = [0] * n_bins
    prev_focus_buggy: bool | None = None
    for ev in session.events:
        k = _bin_of(ev.t, duration, n_bins)
        if ev.kind == UNBLUR:
            unblurs[k] += 1
            focus_buggy = ev.focus in buggy
            if prev_focus_buggy is not None and focus_buggy != prev_focus_buggy:
                switch[k] += 1
            prev_focus_buggy = focus_buggy
        elif ev.kind == EDIT:
            edits[k] += 1

    bins = []
    for k in range(n_bins):
        mass = buggy_mass[k] + context_mass[k]
        if mass > 0:
            fractions = (buggy_mass[k] / mass, context_mass[k] / mass)
        else:
            fractions = (0.0, 0.0)
        bins.append(
            BinStats(*fractions, switch[k], edits[k], unblurs[k], buggy_mass[k], context_mass[k])
        )
    return TemporalProfile(snippet_id=snippet.snippet_id, n_bins=n_bins, bins=tuple(bins))


# --- window-size sensitivity ---------------------------------------------------

def _session_rng(seed: int, participant_id: str, snippet_id: str) -> random.Random:
    digest = hashlib.sha256(f"{seed}:{participant_id}:{snippet_id}".encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def simulate_window(snippet: Snippet, session: SessionRecord, w: int, seed: int) -> SessionRecord:
    """Replace each unblur set with a random contiguous sub-window of size w.

    Sub-window size is min(w, set size), so w=7 reproduces the session
    unchanged. The draw is seeded per (seed, participant, snippet) and does not
    depend on cohort iteration order. When the focus token falls outside the
    sub-window, the nearest retained token becomes the focus.
    """
    if not 1 <= w <= 7:
        raise ValueError(f"w must be in 1..7, got {w}")
    rng = _session_rng(seed, session.participant_id, session.snippet_id)
    new_events: list[InteractionEvent] = []
    for ev in session.events:
        if ev.kind != UNBLUR:
            new_events.append(ev)
            continue
        vis = ev.visible
        m = min(w, len(vis))
        start = rng.randrange(len(vis) - m + 1)
        sub = vis[start : start + m]
        focus = ev.focus if ev.focus in sub else min(sub, key=lambda i: (abs(i - ev.focus), i))
        new_events.append(
            InteractionEvent(t=ev.t, kind=UNBLUR, focus=focus, visible=sub, input_source=ev.input_source)
        )
    return replace(session, events=tuple(new_events))


def window_sensitivity(
    snippet: Snippet,
    sessions: Sequence[SessionRecord],
    w: int,
    seed: int,
) -> list[CorrelationResult]:
    """Inter-developer correlations after shrinking every unblur window to w.

    Returns one result per unordered session pair; pairs whose re-derived
    vectors are constant are skipped (they carry no rank signal).
    """
    vectors = [
        derive_attention(snippet, simulate_window(snippet, s, w, seed)) for s in sessions
    ]
    results: list[CorrelationResult] = []
    for i in range(len(vectors)):
        for j in range(i + 1, len(vectors)):
            try:
                results.append(spearman(vectors[i], vectors[j], pair_kind=PAIR_DEV_DEV))
            except DegenerateInput:
                continue
    return results
