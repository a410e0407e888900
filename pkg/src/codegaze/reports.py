"""Batch analysis over a corpus + session cohort + model dumps; report emission.

All tables are computed fully in memory and only then written, so a failing
input never leaves a partial report behind. Iteration orders are sorted and
floats are rendered with repr(), which makes re-runs byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from . import analysis
from .analysis import (
    CorrelationResult,
    DegenerateInput,
    PAIR_DEV_DEV,
    PAIR_DEV_MODEL,
    PAIR_MODEL_MODEL,
    buggy_line_share,
    dfu_report,
    jsd,
    length_context_correlation,
    significance_filter,
    spearman,
    temporal_profile,
    window_sensitivity,
)
from .corpus import load_corpus
from .model_attention import (
    ModelAttentionDump,
    aggregate,
    copy_attention,
    load_dumps,
    validate_against_snippet,
)
from .sessions import SessionRecord, VALIDITY_VALID, derive_attention, load_sessions
from .tokens import AttentionVector, Snippet

REPORT_FORMAT_VERSION = 1

KIND_DEV = "dev"
KIND_MODEL = "model"

CORRELATIONS_CSV = "correlations.csv"
SHARES_CSV = "shares.csv"
DFU_CSV = "dfu.csv"
TEMPORAL_CSV = "temporal.csv"
SENSITIVITY_CSV = "sensitivity.csv"
AOI_CSV = "aoi.csv"
SUMMARY_JSON = "summary.json"


class InputError(ValueError):
    """A problem in user-supplied files; maps to exit code 1."""


@dataclass(frozen=True)
class Subject:
    """One attention vector with a stable display name."""

    snippet_id: str
    name: str
    kind: str
    vector: AttentionVector


@dataclass
class CohortInputs:
    snippets: dict[str, Snippet]
    sessions: list[SessionRecord]
    dumps: list[ModelAttentionDump]

    @property
    def valid_sessions(self) -> list[SessionRecord]:
        return [s for s in self.sessions if s.validity == VALIDITY_VALID]

    def excluded_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for s in self.sessions:
            if s.validity != VALIDITY_VALID:
                out[s.validity] = out.get(s.validity, 0) + 1
        return out


def load_inputs(corpus_path: str | Path, sessions_path: str | Path, dumps_path: str | Path | None) -> CohortInputs:
    try:
        snippets = load_corpus(corpus_path)
    except Exception as exc:
        raise InputError(f"corpus: {exc}") from exc
    try:
        sessions = load_sessions(sessions_path)
    except Exception as exc:
        raise InputError(f"sessions: {exc}") from exc
    dumps: list[ModelAttentionDump] = []
    if dumps_path is not None:
        try:
            dumps = load_dumps(dumps_path)
        except Exception as exc:
            raise InputError(f"dumps: {exc}") from exc
    for s in sessions:
        if s.snippet_id not in snippets:
            raise InputError(f"session for {s.participant_id!r} references unknown snippet {s.snippet_id!r}")
    for d in dumps:
        if d.snippet_id not in snippets:
            raise InputError(f"dump {d.model_id!r} references unknown snippet {d.snippet_id!r}")
        try:
            validate_against_snippet(d, snippets[d.snippet_id])
        except Exception as exc:
            raise InputError(str(exc)) from exc
    return CohortInputs(snippets=snippets, sessions=sessions, dumps=dumps)


def _unique_name(base: str, taken: set[str]) -> str:
    name = base
    k = 1
    while name in taken:
        k += 1
        name = f"{base}~{k}"
    taken.add(name)
    return name


def dev_subjects(inputs: CohortInputs) -> list[Subject]:
    subjects: list[Subject] = []
    taken_per_snippet: dict[str, set[str]] = {}
    for s in sorted(inputs.valid_sessions, key=lambda s: (s.snippet_id, s.participant_id)):
        snippet = inputs.snippets[s.snippet_id]
        taken = taken_per_snippet.setdefault(s.snippet_id, set())
        name = _unique_name(s.participant_id, taken)
        subjects.append(
            Subject(s.snippet_id, name, KIND_DEV, derive_attention(snippet, s))
        )
    return subjects


def model_subjects(inputs: CohortInputs) -> list[Subject]:
    subjects: list[Subject] = []
    for d in sorted(inputs.dumps, key=lambda d: (d.snippet_id, d.model_id)):
        subjects.append(Subject(d.snippet_id, d.model_id, KIND_MODEL, aggregate(d)))
        if d.copy_steps is not None:
            subjects.append(
                Subject(d.snippet_id, f"{d.model_id}#copy", KIND_MODEL, copy_attention(d))
            )
    return subjects


@dataclass(frozen=True)
class PairRow:
    snippet_id: str
    kind: str
    a: str
    b: str
    n: int
    status: str
    rho: float | None
    p_value: float | None
    jsd: float | None
    kept: bool


def _pair_row(snippet_id: str, kind: str, sa: Subject, sb: Subject, alpha: float) -> PairRow:
    try:
        divergence: float | None = jsd(sa.vector, sb.vector)
    except analysis.ZeroMass:
        divergence = None
    try:
        r = spearman(sa.vector, sb.vector, pair_kind=kind)
    except DegenerateInput:
        return PairRow(snippet_id, kind, sa.name, sb.name, len(sa.vector.weights), "degenerate", None, None, divergence, False)
    return PairRow(
        snippet_id, kind, sa.name, sb.name, r.n, "ok", r.rho, r.p_value, divergence, r.p_value <= alpha
    )


def correlation_rows(inputs: CohortInputs, alpha: float) -> list[PairRow]:
    devs = dev_subjects(inputs)
    models = model_subjects(inputs)
    rows: list[PairRow] = []
    for sid in sorted(inputs.snippets):
        d = [s for s in devs if s.snippet_id == sid]
        m = [s for s in models if s.snippet_id == sid]
        for i in range(len(d)):
            for j in range(i + 1, len(d)):
                rows.append(_pair_row(sid, PAIR_DEV_DEV, d[i], d[j], alpha))
        for dev in d:
            for mod in m:
                rows.append(_pair_row(sid, PAIR_DEV_MODEL, dev, mod, alpha))
        for i in range(len(m)):
            for j in range(i + 1, len(m)):
                rows.append(_pair_row(sid, PAIR_MODEL_MODEL, m[i], m[j], alpha))
    return rows


@dataclass(frozen=True)
class ShareRow:
    snippet_id: str
    subject: str
    kind: str
    token_count: int
    buggy_share: float
    context_share: float


def share_rows(inputs: CohortInputs) -> list[ShareRow]:
    rows = []
    for subj in dev_subjects(inputs) + model_subjects(inputs):
        snippet = inputs.snippets[subj.snippet_id]
        share = buggy_line_share(snippet, subj.vector)
        rows.append(
            ShareRow(subj.snippet_id, subj.name, subj.kind, len(snippet.tokens), share, 1.0 - share)
        )
    rows.sort(key=lambda r: (r.snippet_id, r.kind, r.subject))
    return rows


@dataclass(frozen=True)
class DfuRow:
    snippet_id: str
    subject: str
    kind: str
    group: str
    group_token_count: int
    token_share: float
    attention_share: float
    dfu: float


def dfu_rows(inputs: CohortInputs) -> list[DfuRow]:
    rows = []
    for subj in dev_subjects(inputs) + model_subjects(inputs):
        snippet = inputs.snippets[subj.snippet_id]
        report = dfu_report(snippet, subj.vector)
        for group in sorted(report.entries):
            e = report.entries[group]
            rows.append(
                DfuRow(
                    subj.snippet_id, subj.name, subj.kind, group,
                    e.token_count, e.token_share, e.attention_share, e.dfu,
                )
            )
    rows.sort(key=lambda r: (r.snippet_id, r.kind, r.subject, r.group))
    return rows


@dataclass(frozen=True)
class TemporalRow:
    snippet_id: str
    subject: str
    bin: int
    buggy_fraction: float
    context_fraction: float
    switch_count: int
    edit_count: int
    unblur_count: int


def temporal_rows(inputs: CohortInputs, n_bins: int) -> list[TemporalRow]:
    rows = []
    for s in sorted(inputs.valid_sessions, key=lambda s: (s.snippet_id, s.participant_id)):
        snippet = inputs.snippets[s.snippet_id]
        profile = temporal_profile(snippet, s, n_bins)
        for k, b in enumerate(profile.bins):
            rows.append(
                TemporalRow(
                    s.snippet_id, s.participant_id, k,
                    b.buggy_fraction, b.context_fraction,
                    b.switch_count, b.edit_count, b.unblur_count,
                )
            )
    return rows


def _mean(xs: Sequence[float]) -> float | None:
    return sum(xs) / len(xs) if xs else None


def _kind_summary(rows: list[PairRow], kind: str) -> dict:
    of_kind = [r for r in rows if r.kind == kind]
    kept = [r for r in of_kind if r.kept]
    return {
        "pairs": len(of_kind),
        "degenerate": sum(1 for r in of_kind if r.status == "degenerate"),
        "kept": len(kept),
        "discarded": len(of_kind) - len(kept),
        "mean_rho": _mean([r.rho for r in kept if r.rho is not None]),
        "mean_jsd": _mean([r.jsd for r in kept if r.jsd is not None]),
    }


def _by_model_summary(rows: list[PairRow]) -> dict:
    models = sorted({r.b for r in rows if r.kind == PAIR_DEV_MODEL})
    out = {}
    for m in models:
        kept = [r for r in rows if r.kind == PAIR_DEV_MODEL and r.b == m and r.kept]
        all_m = [r for r in rows if r.kind == PAIR_DEV_MODEL and r.b == m]
        out[m] = {
            "pairs": len(all_m),
            "kept": len(kept),
            "mean_rho": _mean([r.rho for r in kept if r.rho is not None]),
            "mean_jsd": _mean([r.jsd for r in kept if r.jsd is not None]),
        }
    return out


def build_summary(
    inputs: CohortInputs,
    pair_rows: list[PairRow],
    shares: list[ShareRow],
    dfus: list[DfuRow],
    temporals: list[TemporalRow],
    alpha: float,
    n_bins: int,
    seed: int,
) -> dict:
    dev_shares = [r for r in shares if r.kind == KIND_DEV]
    model_share_by_name: dict[str, list[float]] = {}
    for r in shares:
        if r.kind == KIND_MODEL:
            model_share_by_name.setdefault(r.subject, []).append(r.buggy_share)

    lc_pairs = [(r.token_count, r.context_share) for r in dev_shares]
    try:
        lc = length_context_correlation(lc_pairs)
        length_context: dict = {"status": "ok", "rho": lc.rho, "p_value": lc.p_value, "n": lc.n}
    except DegenerateInput as exc:
        length_context = {"status": "degenerate", "n": len(lc_pairs), "reason": str(exc)}

    dfu_means: dict[str, dict[str, float | None]] = {KIND_DEV: {}, KIND_MODEL: {}}
    for kind in (KIND_DEV, KIND_MODEL):
        groups = sorted({r.group for r in dfus if r.kind == kind})
        for g in groups:
            dfu_means[kind][g] = _mean([r.dfu for r in dfus if r.kind == kind and r.group == g])

    per_bin_buggy: list[float | None] = []
    per_bin_switches: list[float | None] = []
    for k in range(n_bins):
        of_bin = [r for r in temporals if r.bin == k]
        per_bin_buggy.append(_mean([r.buggy_fraction for r in of_bin]))
        per_bin_switches.append(_mean([float(r.switch_count) for r in of_bin]))

    return {
        "format_version": REPORT_FORMAT_VERSION,
        "alpha": alpha,
        "n_bins": n_bins,
        "seed": seed,
        "inputs": {
            "snippets": len(inputs.snippets),
            "sessions_total": len(inputs.sessions),
            "sessions_valid": len(inputs.valid_sessions),
            "excluded": inputs.excluded_counts(),
            "dumps": len(inputs.dumps),
        },
        "correlations": {
            PAIR_DEV_DEV: _kind_summary(pair_rows, PAIR_DEV_DEV),
            PAIR_DEV_MODEL: _kind_summary(pair_rows, PAIR_DEV_MODEL),
            PAIR_MODEL_MODEL: _kind_summary(pair_rows, PAIR_MODEL_MODEL),
            "dev_model_by_model": _by_model_summary(pair_rows),
        },
        "shares": {
            "dev": {
                "n": len(dev_shares),
                "mean_buggy": _mean([r.buggy_share for r in dev_shares]),
                "mean_context": _mean([r.context_share for r in dev_shares]),
            },
            "model": {
                name: {"n": len(v), "mean_buggy": _mean(v)}
                for name, v in sorted(model_share_by_name.items())
            },
        },
        "length_context": length_context,
        "dfu_means": dfu_means,
        "temporal": {
            "mean_buggy_fraction_per_bin": per_bin_buggy,
            "mean_switches_per_bin": per_bin_switches,
            "sessions": len({(r.snippet_id, r.subject) for r in temporals}),
        },
    }


# --- emission -----------------------------------------------------------------

def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _csv_bytes(header: Sequence[str], rows: Iterable[Sequence]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue().encode("utf-8")


def render_correlations_csv(rows: list[PairRow]) -> bytes:
    return _csv_bytes(
        ["snippet_id", "kind", "a", "b", "n", "status", "rho", "p_value", "jsd", "kept"],
        [(r.snippet_id, r.kind, r.a, r.b, r.n, r.status, r.rho, r.p_value, r.jsd, r.kept) for r in rows],
    )


def render_shares_csv(rows: list[ShareRow]) -> bytes:
    return _csv_bytes(
        ["snippet_id", "subject", "kind", "token_count", "buggy_share", "context_share"],
        [(r.snippet_id, r.subject, r.kind, r.token_count, r.buggy_share, r.context_share) for r in rows],
    )


def render_dfu_csv(rows: list[DfuRow]) -> bytes:
    return _csv_bytes(
        ["snippet_id", "subject", "kind", "group", "group_token_count", "token_share", "attention_share", "dfu"],
        [
            (r.snippet_id, r.subject, r.kind, r.group, r.group_token_count, r.token_share, r.attention_share, r.dfu)
            for r in rows
        ],
    )


def render_temporal_csv(rows: list[TemporalRow]) -> bytes:
    return _csv_bytes(
        ["snippet_id", "subject", "bin", "buggy_fraction", "context_fraction", "switch_count", "edit_count", "unblur_count"],
        [
            (r.snippet_id, r.subject, r.bin, r.buggy_fraction, r.context_fraction, r.switch_count, r.edit_count, r.unblur_count)
            for r in rows
        ],
    )


def render_summary_json(summary: dict) -> bytes:
    return (json.dumps(summary, indent=2, sort_keys=True, allow_nan=False) + "\n").encode("utf-8")


def run_analyze(
    corpus_path: str | Path,
    sessions_path: str | Path,
    dumps_path: str | Path | None,
    out_dir: str | Path,
    alpha: float,
    n_bins: int,
    seed: int,
) -> dict:
    """Compute every table, then write the report directory. Returns the summary."""
    inputs = load_inputs(corpus_path, sessions_path, dumps_path)
    if not inputs.valid_sessions:
        raise InputError("no valid sessions to analyze")
    pair = correlation_rows(inputs, alpha)
    shares = share_rows(inputs)
    dfus = dfu_rows(inputs)
    temporals = temporal_rows(inputs, n_bins)
    summary = build_summary(inputs, pair, shares, dfus, temporals, alpha, n_bins, seed)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / CORRELATIONS_CSV).write_bytes(render_correlations_csv(pair))
    (out / SHARES_CSV).write_bytes(render_shares_csv(shares))
    (out / DFU_CSV).write_bytes(render_dfu_csv(dfus))
    (out / TEMPORAL_CSV).write_bytes(render_temporal_csv(temporals))
    (out / SUMMARY_JSON).write_bytes(render_summary_json(summary))
    return summary


# --- window-size sensitivity ----------------------------------------------------

@dataclass(frozen=True)
class SensitivityRow:
    w: int
    pairs: int
    mean_rho: float | None
    min_rho: float | None
    max_rho: float | None


def sensitivity_rows(inputs: CohortInputs, w_values: Sequence[int], seed: int) -> list[SensitivityRow]:
    by_snippet: dict[str, list[SessionRecord]] = {}
    for s in inputs.valid_sessions:
        by_snippet.setdefault(s.snippet_id, []).append(s)
    for sid in by_snippet:
        by_snippet[sid].sort(key=lambda s: s.participant_id)
    rows = []
    for w in sorted(set(w_values)):
        results: list[CorrelationResult] = []
        for sid in sorted(by_snippet):
            results.extend(window_sensitivity(inputs.snippets[sid], by_snippet[sid], w, seed))
        rhos = [r.rho for r in results]
        rows.append(
            SensitivityRow(
                w=w,
                pairs=len(rhos),
                mean_rho=_mean(rhos),
                min_rho=min(rhos) if rhos else None,
                max_rho=max(rhos) if rhos else None,
            )
        )
    return rows


def render_sensitivity_csv(rows: list[SensitivityRow]) -> bytes:
    return _csv_bytes(
        ["w", "pairs", "mean_rho", "min_rho", "max_rho"],
        [(r.w, r.pairs, r.mean_rho, r.min_rho, r.max_rho) for r in rows],
    )


def run_sensitivity(
    corpus_path: str | Path,
    sessions_path: str | Path,
    out_dir: str | Path,
    w_values: Sequence[int],
    seed: int,
) -> list[SensitivityRow]:
    inputs = load_inputs(corpus_path, sessions_path, None)
    if not inputs.valid_sessions:
        raise InputError("no valid sessions to analyze")
    bad = [w for w in w_values if not 1 <= w <= 7]
    if bad:
        raise InputError(f"window sizes {bad} outside 1..7")
    rows = sensitivity_rows(inputs, w_values, seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / SENSITIVITY_CSV).write_bytes(render_sensitivity_csv(rows))
    return rows


# --- area-of-interest validation -------------------------------------------------

def parse_aoi_spec(doc: dict) -> dict[str, set[int]]:
    """AOI file: {"aoi": {snippet_id: [line or [lo, hi], ...]}}."""
    body = doc.get("aoi")
    if not isinstance(body, dict):
        raise InputError('AOI spec must contain an "aoi" object')
    out: dict[str, set[int]] = {}
    for sid, entries in body.items():
        lines: set[int] = set()
        for entry in entries:
            if isinstance(entry, int):
                lines.add(entry)
            elif isinstance(entry, (list, tuple)) and len(entry) == 2:
                lo, hi = entry
                lines.update(range(lo, hi + 1))
            else:
                raise InputError(f"AOI entry {entry!r} for {sid!r} is neither a line nor a [lo, hi] range")
        if not lines:
            raise InputError(f"AOI for {sid!r} is empty")
        out[sid] = lines
    return out


@dataclass(frozen=True)
class AoiRow:
    snippet_id: str
    subject: str
    aoi_lines: str
    share: float


def aoi_rows(inputs: CohortInputs, aoi: dict[str, set[int]]) -> tuple[list[AoiRow], float]:
    rows = []
    for subj in dev_subjects(inputs):
        if subj.snippet_id not in aoi:
            raise InputError(f"no AOI mapping for snippet {subj.snippet_id!r}")
        lines = aoi[subj.snippet_id]
        share = analysis.aoi_share(inputs.snippets[subj.snippet_id], subj.vector, lines)
        rows.append(
            AoiRow(subj.snippet_id, subj.name, " ".join(str(n) for n in sorted(lines)), share)
        )
    if not rows:
        raise InputError("no valid sessions to score")
    return rows, sum(r.share for r in rows) / len(rows)


def render_aoi_csv(rows: list[AoiRow]) -> bytes:
    return _csv_bytes(
        ["snippet_id", "subject", "aoi_lines", "share"],
        [(r.snippet_id, r.subject, r.aoi_lines, r.share) for r in rows],
    )


# --- replay rendering -------------------------------------------------------------

HEAT_RAMP = " .:-=+*#%@"


def render_replay(snippet: Snippet, session: SessionRecord) -> str:
    """Token weights plus a per-line textual heatmap aligned under the source."""
    vector = derive_attention(snippet, session)
    out = io.StringIO()
    out.write(f"snippet: {snippet.snippet_id}\n")
    out.write(f"participant: {session.participant_id}\n")
    out.write(f"duration_ms: {session.duration_ms}\n")
    out.write("tokens:\n")
    for tok in snippet.tokens:
        out.write(f"  {tok.index}\t{tok.text}\t{vector.weights[tok.index]!r}\n")
    out.write("heatmap:\n")
    lines = snippet.lines
    for line_no, text in enumerate(lines, start=1):
        marker = "*" if line_no == snippet.buggy_line else " "
        out.write(f"{marker}{line_no:>4} | {text}\n")
        heat = [" "] * len(text)
        for tok in snippet.line_tokens(line_no):
            level = min(int(vector.weights[tok.index] * 10), 9)
            for col in range(tok.col_start, min(tok.col_end, len(text))):
                heat[col] = HEAT_RAMP[level]
        out.write(f"{'':>5} | {''.join(heat)}\n")
    return out.getvalue()
