"""Snippet corpus on disk: one UTF-8 JSON document per snippet.

Document fields: format_version, snippet_id, source, buggy_line, description.
A corpus is a directory of ``*.json`` files (or a single file).
"""

from __future__ import annotations

import json
from pathlib import Path

from .tokens import LexError, Snippet

CORPUS_FORMAT_VERSION = 1


class CorpusError(ValueError):
    pass


def snippet_to_doc(snippet: Snippet) -> dict:
    return {
        "format_version": CORPUS_FORMAT_VERSION,
        "snippet_id": snippet.snippet_id,
        "source": snippet.source,
        "buggy_line": snippet.buggy_line,
        "description": snippet.description,
    }


def snippet_from_doc(doc: dict) -> Snippet:
    try:
        version = doc["format_version"]
        snippet_id = doc["snippet_id"]
        source = doc["source"]
        buggy_line = doc["buggy_line"]
    except KeyError as exc:
        raise CorpusError(f"snippet document missing field {exc}") from None
    if version != CORPUS_FORMAT_VERSION:
        raise CorpusError(f"unsupported corpus format_version {version!r}")
    if not isinstance(buggy_line, int):
        raise CorpusError("buggy_line must be an integer")
    try:
        return Snippet.from_source(snippet_id, source, buggy_line, doc.get("description", ""))
    except (LexError, ValueError) as exc:
        raise CorpusError(f"snippet {snippet_id!r}: {exc}") from exc


def save_snippet(snippet: Snippet, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(snippet_to_doc(snippet), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def load_snippet(path: str | Path) -> Snippet:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorpusError(f"{path}: not valid JSON ({exc})") from exc
    return snippet_from_doc(doc)


def load_corpus(path: str | Path) -> dict[str, Snippet]:
    """Load all snippets under `path` (directory of *.json, or one file)."""
    p = Path(path)
    if p.is_file():
        files = [p]
    elif p.is_dir():
        files = sorted(p.glob("*.json"))
    else:
        raise CorpusError(f"corpus path {p} does not exist")
    if not files:
        raise CorpusError(f"no snippet documents under {p}")
    corpus: dict[str, Snippet] = {}
    for f in files:
        snip = load_snippet(f)
        if snip.snippet_id in corpus:
            raise CorpusError(f"duplicate snippet_id {snip.snippet_id!r} in {f}")
        corpus[snip.snippet_id] = snip
    return corpus


def lint_corpus(path: str | Path) -> list[tuple[str, str]]:
    """Validate every snippet document; returns (file, problem) pairs, empty if clean."""
    p = Path(path)
    files = [p] if p.is_file() else sorted(p.glob("*.json"))
    problems: list[tuple[str, str]] = []
    if not files:
        return [(str(p), "no snippet documents found")]
    seen: set[str] = set()
    for f in files:
        try:
            snip = load_snippet(f)
        except CorpusError as exc:
            problems.append((str(f), str(exc)))
            continue
        if "\r" in snip.source:
            problems.append((str(f), "source contains carriage returns"))
            continue
        if snip.snippet_id in seen:
            problems.append((str(f), f"duplicate snippet_id {snip.snippet_id!r}"))
            continue
        seen.add(snip.snippet_id)
        try:
            snip.check_invariants()
        except AssertionError as exc:
            problems.append((str(f), f"invariant violation: {exc}"))
    return problems
