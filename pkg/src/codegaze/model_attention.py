"""Ingestion of neural-model attention dumps and reduction to per-token vectors.

Dumps are produced offline by instrumented models and loaded as JSON. A dump
carries one attention step per predicted output element, either token-level
(one weight per snippet token) or node-level (weights on AST nodes plus the
token span each node covers). Node weights are projected to tokens by equal
division over the span; steps are averaged element-wise.

Arithmetic uses exact rationals until the final float conversion so that
aggregation is invariant under step permutation and k identical steps
reproduce the step bit-for-bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .tokens import AttentionVector, Snippet

DUMP_FORMAT_VERSION = 1

TOKEN_LEVEL = "token_level"
NODE_LEVEL = "node_level"


class DumpError(ValueError):
    pass


class SpanError(DumpError):
    pass


class EmptyDump(DumpError):
    pass


class MissingCopyAttention(DumpError):
    pass


@dataclass(frozen=True)
class NodeAttention:
    """Attention mass on one AST node for one output step.

    `span` is the inclusive token index range the node maps to. `direct` marks
    a terminal's own attention (as opposed to mass propagated from ancestors);
    it does not change the projection, which always divides weight equally
    over the span.
    """

    node_id: int
    weight: float
    span_lo: int
    span_hi: int
    terminal: bool = False
    direct: bool = False

    def __post_init__(self) -> None:
        if not math.isfinite(self.weight) or self.weight < 0:
            raise DumpError(f"node {self.node_id}: weight {self.weight!r} must be finite and >= 0")
        if self.span_lo > self.span_hi:
            raise SpanError(f"node {self.node_id}: empty span [{self.span_lo}, {self.span_hi}]")
        if self.span_lo < 0:
            raise SpanError(f"node {self.node_id}: span starts at {self.span_lo}")
        if self.terminal and self.span_hi != self.span_lo:
            raise SpanError(f"node {self.node_id}: terminal node spans {self.span_hi - self.span_lo + 1} tokens")

    @property
    def span_len(self) -> int:
        return self.span_hi - self.span_lo + 1


NodeStep = tuple[NodeAttention, ...]
TokenStep = tuple[float, ...]


@dataclass(frozen=True)
class ProjectedStep:
    """One step reduced to token space; weights kept as exact rationals."""

    weights: tuple[Fraction, ...]

    def as_floats(self) -> tuple[float, ...]:
        return tuple(float(w) for w in self.weights)

    def total(self) -> Fraction:
        return sum(self.weights, Fraction(0))


@dataclass(frozen=True)
class ModelAttentionDump:
    """All attention steps for one (model, snippet) top-ranked prediction."""

    snippet_id: str
    model_id: str
    kind: str
    token_count: int
    steps: tuple[tuple, ...]
    copy_steps: tuple[tuple, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind not in (TOKEN_LEVEL, NODE_LEVEL):
            raise DumpError(f"unknown dump kind {self.kind!r}")
        if self.token_count <= 0:
            raise DumpError(f"token_count must be positive, got {self.token_count}")
        for name, steps in (("steps", self.steps), ("copy_steps", self.copy_steps)):
            if steps is None:
                continue
            for k, step in enumerate(steps):
                self._check_step(name, k, step)

    def _check_step(self, name: str, k: int, step: tuple) -> None:
        if self.kind == TOKEN_LEVEL:
            if len(step) != self.token_count:
                raise DumpError(
                    f"{name}[{k}] has {len(step)} weights, snippet has {self.token_count} tokens"
                )
            for w in step:
                if not math.isfinite(w) or w < 0:
                    raise DumpError(f"{name}[{k}]: weight {w!r} must be finite and >= 0")
        else:
            for node in step:
                if node.span_hi >= self.token_count:
                    raise SpanError(
                        f"{name}[{k}]: node {node.node_id} span ends at {node.span_hi}, "
                        f"snippet has {self.token_count} tokens"
                    )

    @property
    def k(self) -> int:
        return len(self.steps)


def _project_nodes(token_count: int, node_step: Iterable[NodeAttention]) -> ProjectedStep:
    weights = [Fraction(0)] * token_count
    for node in node_step:
        if node.span_hi >= token_count:
            raise SpanError(
                f"node {node.node_id} span [{node.span_lo}, {node.span_hi}] exceeds "
                f"{token_count} tokens"
            )
        share = Fraction(node.weight) / node.span_len
        for i in range(node.span_lo, node.span_hi + 1):
            weights[i] += share
    return ProjectedStep(weights=tuple(weights))


def project_node_step(snippet: Snippet, node_step: Iterable[NodeAttention]) -> ProjectedStep:
    """Divide each node's weight equally over its token span; sum per token."""
    return _project_nodes(len(snippet.tokens), node_step)


def _step_fractions(kind: str, token_count: int, step: tuple) -> tuple[Fraction, ...]:
    if kind == TOKEN_LEVEL:
        return tuple(Fraction(w) for w in step)
    return _project_nodes(token_count, step).weights


def _aggregate_steps(dump: ModelAttentionDump, steps: Sequence[tuple]) -> AttentionVector:
    if not steps:
        raise EmptyDump(f"dump for {dump.snippet_id!r}/{dump.model_id!r} has no steps")
    totals = [Fraction(0)] * dump.token_count
    for step in steps:
        for i, w in enumerate(_step_fractions(dump.kind, dump.token_count, step)):
            totals[i] += w
    k = len(steps)
    return AttentionVector(
        snippet_id=dump.snippet_id,
        weights=tuple(float(t / k) for t in totals),
    )


def aggregate(dump: ModelAttentionDump) -> AttentionVector:
    """Element-wise mean of the (projected) steps: m_i = mean over k steps."""
    return _aggregate_steps(dump, dump.steps)


def copy_attention(dump: ModelAttentionDump) -> AttentionVector:
    """Same aggregation applied to the copy-attention steps."""
    if dump.copy_steps is None:
        raise MissingCopyAttention(
            f"dump for {dump.snippet_id!r}/{dump.model_id!r} has no copy_steps"
        )
    return _aggregate_steps(dump, dump.copy_steps)


# --- serialization -----------------------------------------------------------

def _node_to_doc(node: NodeAttention) -> dict:
    return {
        "node": node.node_id,
        "weight": node.weight,
        "span": [node.span_lo, node.span_hi],
        "terminal": node.terminal,
        "direct": node.direct,
    }


def _node_from_doc(doc: dict) -> NodeAttention:
    span = doc["span"]
    if not isinstance(span, (list, tuple)) or len(span) != 2:
        raise DumpError(f"node span must be a [lo, hi] pair, got {span!r}")
    return NodeAttention(
        node_id=doc["node"],
        weight=doc["weight"],
        span_lo=span[0],
        span_hi=span[1],
        terminal=doc.get("terminal", False),
        direct=doc.get("direct", False),
    )


def _steps_to_doc(kind: str, steps: tuple[tuple, ...]) -> list:
    if kind == TOKEN_LEVEL:
        return [list(step) for step in steps]
    return [[_node_to_doc(n) for n in step] for step in steps]


def _steps_from_doc(kind: str, doc: list) -> tuple[tuple, ...]:
    if kind == TOKEN_LEVEL:
        return tuple(tuple(step) for step in doc)
    return tuple(tuple(_node_from_doc(n) for n in step) for step in doc)


def dump_to_doc(dump: ModelAttentionDump) -> dict:
    doc = {
        "format_version": DUMP_FORMAT_VERSION,
        "snippet_id": dump.snippet_id,
        "model_id": dump.model_id,
        "kind": dump.kind,
        "token_count": dump.token_count,
        "steps": _steps_to_doc(dump.kind, dump.steps),
    }
    if dump.copy_steps is not None:
        doc["copy_steps"] = _steps_to_doc(dump.kind, dump.copy_steps)
    return doc


def dump_from_doc(doc: dict) -> ModelAttentionDump:
    version = doc.get("format_version")
    if version != DUMP_FORMAT_VERSION:
        raise DumpError(f"unsupported dump format_version {version!r}")
    try:
        kind = doc["kind"]
        copy_doc = doc.get("copy_steps")
        return ModelAttentionDump(
            snippet_id=doc["snippet_id"],
            model_id=doc["model_id"],
            kind=kind,
            token_count=doc["token_count"],
            steps=_steps_from_doc(kind, doc["steps"]),
            copy_steps=None if copy_doc is None else _steps_from_doc(kind, copy_doc),
        )
    except KeyError as exc:
        raise DumpError(f"dump document missing field {exc}") from None


def save_dump(dump: ModelAttentionDump, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(dump_to_doc(dump), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def load_dump(path: str | Path) -> ModelAttentionDump:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DumpError(f"{path}: invalid JSON ({exc})") from exc
    return dump_from_doc(doc)


def load_dumps(path: str | Path) -> list[ModelAttentionDump]:
    """Load dumps from a directory of *.json files or a single file."""
    p = Path(path)
    if p.is_dir():
        return [load_dump(f) for f in sorted(p.glob("*.json"))]
    if p.is_file():
        return [load_dump(p)]
    raise DumpError(f"dumps path {p} does not exist")


def validate_against_snippet(dump: ModelAttentionDump, snippet: Snippet) -> None:
    if dump.snippet_id != snippet.snippet_id:
        raise DumpError(f"dump is for {dump.snippet_id!r}, not {snippet.snippet_id!r}")
    if dump.token_count != len(snippet.tokens):
        raise DumpError(
            f"dump says {dump.token_count} tokens, snippet {snippet.snippet_id!r} "
            f"has {len(snippet.tokens)}"
        )
