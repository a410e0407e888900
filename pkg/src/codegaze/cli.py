"""Command-line entry points.

Subcommands: analyze, replay, validate-aoi, sensitivity, serve, lint-corpus.
Exit codes: 0 success, 1 input error, 2 internal error. Batch runs are driven
by a manifest file; flags override manifest fields. Relative paths inside a
manifest resolve against the manifest's directory.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from dataclasses import dataclass
from pathlib import Path

from .corpus import CorpusError, lint_corpus, load_corpus
from .model_attention import DumpError
from .reports import (
    AOI_CSV,
    InputError,
    aoi_rows,
    load_inputs,
    parse_aoi_spec,
    render_aoi_csv,
    render_replay,
    run_analyze,
    run_sensitivity,
)
from .sessions import MalformedLog, load_session
from .tokens import LexError

MANIFEST_FORMAT_VERSION = 1

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INTERNAL = 2

INPUT_ERRORS = (
    InputError,
    CorpusError,
    DumpError,
    MalformedLog,
    LexError,
    FileNotFoundError,
    NotADirectoryError,
    IsADirectoryError,
    json.JSONDecodeError,
)


@dataclass(frozen=True)
class RunManifest:
    corpus: Path
    sessions: Path
    out: Path
    dumps: Path | None = None
    alpha: float = 0.05
    n_bins: int = 20
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise InputError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.n_bins < 2:
            raise InputError(f"n_bins must be >= 2, got {self.n_bins}")
        for name, path in (("corpus", self.corpus), ("sessions", self.sessions), ("dumps", self.dumps)):
            if path is not None and not path.exists():
                raise InputError(f"{name} path {path} does not exist")


def _load_manifest_doc(path: Path) -> dict:
    doc = json.loads(path.read_text(encoding="utf-8"))
    version = doc.get("format_version")
    if version != MANIFEST_FORMAT_VERSION:
        raise InputError(f"unsupported manifest format_version {version!r}")
    return doc


def resolve_manifest(args: argparse.Namespace, need_dumps_field: bool = True) -> RunManifest:
    doc: dict = {}
    base = Path.cwd()
    if args.manifest:
        manifest_path = Path(args.manifest)
        doc = _load_manifest_doc(manifest_path)
        base = manifest_path.resolve().parent

    def pick_path(flag_value: str | None, key: str) -> Path | None:
        if flag_value is not None:
            return Path(flag_value)
        value = doc.get(key)
        if value is None:
            return None
        return base / value

    corpus = pick_path(args.corpus, "corpus")
    sessions = pick_path(args.sessions, "sessions")
    out = pick_path(args.out, "out")
    dumps = pick_path(getattr(args, "dumps", None), "dumps") if need_dumps_field else None
    missing = [name for name, p in (("corpus", corpus), ("sessions", sessions), ("out", out)) if p is None]
    if missing:
        raise InputError(f"missing required inputs (flag or manifest field): {', '.join(missing)}")
    return RunManifest(
        corpus=corpus,
        sessions=sessions,
        out=out,
        dumps=dumps,
        alpha=args.alpha if args.alpha is not None else doc.get("alpha", 0.05),
        n_bins=args.bins if args.bins is not None else doc.get("n_bins", 20),
        seed=args.seed if args.seed is not None else doc.get("seed", 0),
    )


def cmd_analyze(args: argparse.Namespace) -> int:
    manifest = resolve_manifest(args)
    summary = run_analyze(
        manifest.corpus,
        manifest.sessions,
        manifest.dumps,
        manifest.out,
        manifest.alpha,
        manifest.n_bins,
        manifest.seed,
    )
    inputs = summary["inputs"]
    print(f"analyzed {inputs['sessions_valid']} valid sessions over {inputs['snippets']} snippets")
    excluded = inputs["excluded"]
    if excluded:
        detail = ", ".join(f"{k}={v}" for k, v in sorted(excluded.items()))
        print(f"excluded sessions: {detail}")
    dd = summary["correlations"]["dev-dev"]
    print(f"dev-dev pairs: {dd['pairs']} ({dd['kept']} kept at alpha={summary['alpha']})")
    print(f"reports written to {manifest.out}")
    return EXIT_OK


def cmd_replay(args: argparse.Namespace) -> int:
    snippets = load_corpus(args.corpus)
    session = load_session(args.session_file)
    snippet = snippets.get(session.snippet_id)
    if snippet is None:
        raise InputError(f"session references snippet {session.snippet_id!r} missing from corpus")
    sys.stdout.write(render_replay(snippet, session))
    return EXIT_OK


def cmd_validate_aoi(args: argparse.Namespace) -> int:
    aoi_doc = json.loads(Path(args.aoi).read_text(encoding="utf-8"))
    aoi = parse_aoi_spec(aoi_doc)
    inputs = load_inputs(args.corpus, args.sessions, None)
    rows, mean = aoi_rows(inputs, aoi)
    for r in rows:
        print(f"{r.snippet_id}\t{r.subject}\t{r.share!r}")
    print(f"mean_aoi_share\t{mean!r}\t({len(rows)} sessions)")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / AOI_CSV).write_bytes(render_aoi_csv(rows))
        summary = {"mean_aoi_share": mean, "sessions": len(rows)}
        (out / "aoi_summary.json").write_text(
            json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        print(f"reports written to {out}")
    return EXIT_OK


def _parse_w_list(text: str) -> list[int]:
    if text == "all":
        return list(range(1, 8))
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise InputError(f"cannot parse window sizes {text!r}: {exc}") from None
    if not values:
        raise InputError("empty window-size list")
    return values


def cmd_sensitivity(args: argparse.Namespace) -> int:
    manifest = resolve_manifest(args, need_dumps_field=False)
    w_values = _parse_w_list(args.w)
    rows = run_sensitivity(manifest.corpus, manifest.sessions, manifest.out, w_values, manifest.seed)
    print("w\tpairs\tmean_rho")
    for r in rows:
        print(f"{r.w}\t{r.pairs}\t{'' if r.mean_rho is None else repr(r.mean_rho)}")
    print(f"reports written to {manifest.out}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import StudyConfig, create_app

    config = StudyConfig(
        corpus_path=args.corpus,
        storage_dir=args.storage,
        tasks_per_participant=args.tasks_per_participant,
        seed=args.seed if args.seed is not None else 0,
        host=args.host,
        port=args.port,
        session_minutes=args.session_minutes,
    )
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    return EXIT_OK


def cmd_lint_corpus(args: argparse.Namespace) -> int:
    problems = lint_corpus(args.path)
    for file, problem in problems:
        print(f"{file}: {problem}")
    if problems:
        print(f"{len(problems)} problem(s) found")
        return EXIT_INPUT
    print("corpus clean")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="codegaze",
        description="Token-level attention tracking and analysis for code-repair studies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_manifest_flags(p: argparse.ArgumentParser, with_dumps: bool) -> None:
        p.add_argument("--manifest", help="JSON manifest driving the run")
        p.add_argument("--corpus", help="snippet corpus file or directory")
        p.add_argument("--sessions", help="session file, directory, or .jsonl")
        if with_dumps:
            p.add_argument("--dumps", help="model attention dump file or directory")
        p.add_argument("--out", help="report output directory")
        p.add_argument("--alpha", type=float, help="significance threshold (default 0.05)")
        p.add_argument("--bins", type=int, help="temporal bins (default 20)")
        p.add_argument("--seed", type=int, help="simulation seed (default 0)")

    p = sub.add_parser("analyze", help="run the full batch analysis and write reports")
    add_manifest_flags(p, with_dumps=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("replay", help="recompute one session's attention and print a heatmap")
    p.add_argument("--corpus", required=True)
    p.add_argument("session_file")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("validate-aoi", help="score attention shares against areas of interest")
    p.add_argument("--corpus", required=True)
    p.add_argument("--sessions", required=True)
    p.add_argument("--aoi", required=True, help="JSON mapping snippet ids to AOI lines")
    p.add_argument("--out", help="optional report output directory")
    p.set_defaults(func=cmd_validate_aoi)

    p = sub.add_parser("sensitivity", help="simulate shrunken unblur windows")
    add_manifest_flags(p, with_dumps=False)
    p.add_argument("--w", default="all", help='window sizes, e.g. "1,3,7" or "all"')
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("serve", help="run the study HTTP service")
    p.add_argument("--corpus", required=True)
    p.add_argument("--storage", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8077)
    p.add_argument("--tasks-per-participant", type=int, default=4)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--session-minutes", type=int, default=15)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("lint-corpus", help="check corpus files for format problems")
    p.add_argument("path")
    p.set_defaults(func=cmd_lint_corpus)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(int(main()))
