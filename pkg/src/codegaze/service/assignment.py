"""Balanced task assignment: keep per-snippet coverage counts as even as possible.

Each participant receives the k snippets with the lowest current coverage,
ties broken by a seeded hash of (seed, participant, snippet) so the draw is
deterministic for a given study seed yet varies across participants. Greedy
min-count keeps the coverage spread within 1, which yields the
floor(participants * k / corpus_size) lower bound on minimum coverage.
"""

from __future__ import annotations

import hashlib
from typing import Mapping, Sequence


class CorpusExhausted(ValueError):
    pass


def _tie_break(seed: int, participant_id: str, snippet_id: str) -> int:
    digest = hashlib.sha256(f"{seed}:{participant_id}:{snippet_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def assign_tasks(
    participant_id: str,
    snippet_ids: Sequence[str],
    coverage: Mapping[str, int],
    k: int,
    seed: int,
) -> list[str]:
    """Pick k distinct snippets for a participant, lowest coverage first.

    `coverage` holds how many participants each snippet is already assigned
    to. Returns snippet ids sorted for stable task ordering.
    """
    if k < 1:
        raise CorpusExhausted(f"tasks per participant must be >= 1, got {k}")
    if k > len(snippet_ids):
        raise CorpusExhausted(
            f"cannot assign {k} distinct tasks from a corpus of {len(snippet_ids)}"
        )
    ranked = sorted(
        snippet_ids,
        key=lambda sid: (coverage.get(sid, 0), _tie_break(seed, participant_id, sid)),
    )
    return sorted(ranked[:k])
