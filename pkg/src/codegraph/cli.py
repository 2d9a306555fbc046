"""Batch driver: analyze corpora, build indexes, link, mine, evaluate.

Per-file analysis failures are data (reported in the run statistics), never
process failures. Exit codes: 0 success, 1 configuration or missing
prerequisite, 2 unmet evaluation precondition, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .dataflow import AnalysisTimeout, analyze_program
from .docs import build_index, class_hierarchy, extract_docs, load_entries, save_entries
from .evaluation import TooFewGraphs, corpus_coverage, kfold_eval
from .frontend import (
    EncodingError,
    NotebookFormatError,
    SourceFile,
    SourceSyntaxError,
    collect_imports,
    dedupe,
    load_source_file,
    parse_source,
)
from .link import (
    ForumLink,
    FormatError,
    build_post_index,
    ingest_posts,
    link_path,
    link_posts,
    link_stats,
    sample_links,
)
from .serialize import docs_to_nquads, dump_json, forum_links_to_nquads, from_json, to_json, to_nquads
from .suggest import build_pathdb, save_pathdb, suggest

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PRECONDITION = 2
EXIT_IO = 3

_SUBDIRS = ("graphs", "docs", "links", "posts", "pathdb", "reports")


class ConfigError(Exception):
    pass


class MissingArtifact(Exception):
    """A command prerequisite (built by an earlier command) is absent."""

    def __init__(self, what: str):
        super().__init__(f"missing prerequisite artifact: {what}")
        self.what = what


@dataclass
class RunConfig:
    input_paths: list[str] = field(default_factory=list)
    output_dir: str = "out"
    format: str = "both"  # nquads | json | both
    timeout_seconds: float = 60.0
    workers: int = 1
    import_threshold: int = 1000
    path_max_len: int = 3
    folds: int = 10
    seed: int = 0
    post_dump_path: str | None = None
    doc_index_path: str | None = None

    def validate(self) -> None:
        if self.timeout_seconds < 1:
            raise ConfigError("--timeout must be >= 1 second")
        if self.folds < 2:
            raise ConfigError("--folds must be >= 2")
        if self.workers < 1:
            raise ConfigError("--workers must be >= 1")
        if self.format not in ("nquads", "json", "both"):
            raise ConfigError(f"unknown format {self.format!r}")

    def as_dict(self) -> dict:
        return {
            "inputPaths": self.input_paths,
            "outputDir": self.output_dir,
            "format": self.format,
            "timeoutSeconds": self.timeout_seconds,
            "workers": self.workers,
            "importThreshold": self.import_threshold,
            "pathMaxLen": self.path_max_len,
            "folds": self.folds,
            "seed": self.seed,
            "postDumpPath": self.post_dump_path,
            "docIndexPath": self.doc_index_path,
        }


_HISTOGRAM_BUCKETS = (("le_10ms", 0.01), ("le_100ms", 0.1), ("le_1s", 1.0), ("le_10s", 10.0))


@dataclass
class RunStats:
    files_seen: int = 0
    duplicates_removed: int = 0
    parse_failures: int = 0
    analysis_failures: int = 0
    analyzed: int = 0
    wall_time_histogram: dict[str, int] = field(
        default_factory=lambda: {name: 0 for name, _ in _HISTOGRAM_BUCKETS} | {"gt_10s": 0}
    )

    @property
    def success_rate(self) -> float:
        unique = self.files_seen - self.duplicates_removed
        return self.analyzed / unique if unique else 1.0

    def record_time(self, seconds: float) -> None:
        for name, bound in _HISTOGRAM_BUCKETS:
            if seconds <= bound:
                self.wall_time_histogram[name] += 1
                return
        self.wall_time_histogram["gt_10s"] += 1

    def as_dict(self) -> dict:
        return {
            "filesSeen": self.files_seen,
            "duplicatesRemoved": self.duplicates_removed,
            "parseFailures": self.parse_failures,
            "analysisFailures": self.analysis_failures,
            "analyzed": self.analyzed,
            "successRate": self.success_rate,
            "wallTimePerFile": self.wall_time_histogram,
        }


# ---------------------------------------------------------------------------
# Shared helpers


def _gather_files(paths: list[str], suffixes: tuple[str, ...]) -> list[Path]:
    out: list[Path] = []
    for raw in paths:
        p = Path(raw)
        if not p.exists():
            raise ConfigError(f"input path does not exist: {raw}")
        if p.is_dir():
            out.extend(sorted(q for q in p.rglob("*") if q.suffix in suffixes and q.is_file()))
        else:
            out.append(p)
    return out


def _ensure_layout(outdir: str) -> Path:
    root = Path(outdir)
    for sub in _SUBDIRS:
        (root / sub).mkdir(parents=True, exist_ok=True)
    return root


def _write_json(path: Path, payload: object) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")


def _update_manifest(root: Path, command: str, config: RunConfig) -> None:
    manifest_path = root / "manifest.json"
    manifest = {}
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    manifest["version"] = __version__
    manifest.setdefault("commands", {})[command] = config.as_dict()
    _write_json(manifest_path, manifest)


def _load_graphs(root: Path):
    graph_files = sorted((root / "graphs").glob("*.json"))
    if not graph_files:
        raise MissingArtifact("graphs (run `codegraph analyze --format json|both` first)")
    return [from_json(json.loads(p.read_text(encoding="utf-8"))) for p in graph_files]


def _table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)),
        "  ".join("-" * widths[i] for i in range(len(headers))),
    ]
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# analyze


def _analyze_one(source: SourceFile, config: RunConfig, root: Path) -> tuple[str, str, float]:
    """Worker body: parse, analyze, serialize. Returns (digest, status, seconds)."""
    started = time.monotonic()
    try:
        tree = parse_source(source)
    except (SourceSyntaxError, EncodingError):
        return source.digest, "parse-failure", time.monotonic() - started
    try:
        graph = analyze_program(
            tree, collect_imports(tree), source.digest, budget_seconds=config.timeout_seconds
        )
    except AnalysisTimeout:
        return source.digest, "analysis-failure", time.monotonic() - started
    except Exception:  # per-file isolation: a crashing analysis is a data point
        logger.exception("analysis crashed for %s", source.path)
        return source.digest, "analysis-failure", time.monotonic() - started
    if config.format in ("nquads", "both"):
        (root / "graphs" / f"{source.digest}.nq").write_text(to_nquads(graph), encoding="utf-8")
    if config.format in ("json", "both"):
        (root / "graphs" / f"{source.digest}.json").write_text(
            dump_json(to_json(graph)) + "\n", encoding="utf-8"
        )
    return source.digest, "analyzed", time.monotonic() - started


def cmd_analyze(config: RunConfig) -> int:
    config.validate()
    root = _ensure_layout(config.output_dir)
    paths = _gather_files(config.input_paths, (".py", ".ipynb"))
    stats = RunStats(files_seen=len(paths))

    loaded: list[SourceFile] = []
    for p in paths:
        try:
            loaded.append(load_source_file(str(p), p.read_bytes()))
        except (NotebookFormatError, OSError):
            stats.parse_failures += 1
    unique = dedupe(loaded)
    stats.duplicates_removed = len(loaded) - len(unique)

    import_counts: dict[str, int] = {}
    for source in unique:
        try:
            tree = parse_source(source)
        except (SourceSyntaxError, EncodingError):
            continue
        for binding in collect_imports(tree):
            rootmod = binding.qualified_path[0]
            import_counts[rootmod] = import_counts.get(rootmod, 0) + 1

    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        results = list(pool.map(lambda s: _analyze_one(s, config, root), unique))
    for _digest, status, seconds in sorted(results):
        stats.record_time(seconds)
        if status == "analyzed":
            stats.analyzed += 1
        elif status == "parse-failure":
            stats.parse_failures += 1
        else:
            stats.analysis_failures += 1

    _write_json(root / "reports" / "analyze_stats.json", stats.as_dict())
    _write_json(
        root / "reports" / "import_counts.json",
        dict(sorted(import_counts.items())),
    )
    _update_manifest(root, "analyze", config)
    print(
        f"analyzed {stats.analyzed}/{stats.files_seen - stats.duplicates_removed} unique files "
        f"({stats.duplicates_removed} duplicates, {stats.parse_failures} parse failures, "
        f"{stats.analysis_failures} analysis failures; success rate {stats.success_rate:.2%})"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# docs


def _module_name_for(file: Path, root: Path) -> tuple[str, ...]:
    rel = file.relative_to(root) if root in file.parents else Path(file.name)
    parts = list(rel.parts)
    parts[-1] = parts[-1][: -len(".py")]
    if parts[-1] == "__init__":
        parts.pop()
    return tuple(parts) if parts else (file.parent.name or file.stem,)


def cmd_docs(config: RunConfig) -> int:
    config.validate()
    root = _ensure_layout(config.output_dir)
    counts_path = root / "reports" / "import_counts.json"
    counts: dict[str, int] | None = None
    if counts_path.exists():
        counts = json.loads(counts_path.read_text(encoding="utf-8"))

    entries = []
    modules = 0
    skipped_unpopular = 0
    parse_failures = 0
    for raw in config.input_paths:
        base = Path(raw)
        if not base.exists():
            raise ConfigError(f"input path does not exist: {raw}")
        files = [base] if base.is_file() else sorted(base.rglob("*.py"))
        for file in files:
            module = _module_name_for(file, base)
            if not module:
                continue
            if counts is not None and counts.get(module[0], 0) < config.import_threshold:
                skipped_unpopular += 1
                continue
            source = load_source_file(str(file), file.read_bytes())
            try:
                tree = parse_source(source)
            except (SourceSyntaxError, EncodingError):
                parse_failures += 1
                continue
            modules += 1
            entries.extend(extract_docs(module, tree))

    index = build_index(entries)
    pairs, unresolved = class_hierarchy(entries)
    save_entries(entries, str(root / "docs" / "index.jsonl"))
    (root / "docs" / "docs.nq").write_text(docs_to_nquads(entries), encoding="utf-8")
    _write_json(
        root / "reports" / "docs_summary.json",
        {
            "modules": modules,
            "entries": len(entries),
            "duplicateWarnings": index.duplicate_warnings,
            "hierarchyPairs": len(pairs),
            "unresolvedBases": unresolved,
            "skippedBelowImportThreshold": skipped_unpopular,
            "parseFailures": parse_failures,
        },
    )
    _update_manifest(root, "docs", config)
    print(f"extracted {len(entries)} entries from {modules} modules")
    return EXIT_OK


# ---------------------------------------------------------------------------
# link


def _doc_index_for(config: RunConfig, root: Path):
    path = Path(config.doc_index_path) if config.doc_index_path else root / "docs" / "index.jsonl"
    if not path.exists():
        raise MissingArtifact("docIndexPath")
    return build_index(load_entries(str(path)))


def cmd_link(config: RunConfig) -> int:
    config.validate()
    root = _ensure_layout(config.output_dir)
    index = _doc_index_for(config, root)
    graphs = _load_graphs(root)

    labels = sorted({n.label for g in graphs for n in g.nodes.values() if n.label})
    with open(root / "links" / "links.jsonl", "w", encoding="utf-8") as fh:
        for label in labels:
            result = link_path(label, index)
            fh.write(
                json.dumps(
                    {
                        "path": list(result.query),
                        "outcome": result.outcome,
                        "matchedPrefix": list(result.matched_prefix) if result.matched_prefix else None,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
    stats = link_stats(graphs, index)
    _write_json(root / "reports" / "link_stats.json", stats)

    forum_summary = {}
    posts_file = root / "posts" / "posts.jsonl"
    if config.post_dump_path or posts_file.exists():
        dump = config.post_dump_path or str(posts_file)
        posts = ingest_posts(dump).posts
        post_index = build_post_index(posts)
        forum_links: list[ForumLink] = []
        for name in sorted(index.entries):
            forum_links.extend(link_posts(tuple(name.split(".")), post_index))
        with open(root / "links" / "forum_links.jsonl", "w", encoding="utf-8") as fh:
            for link in forum_links:
                fh.write(
                    json.dumps(
                        {
                            "qualifiedName": list(link.qualified_name),
                            "postId": link.post_id,
                            "score": link.score,
                        },
                        ensure_ascii=False,
                    )
                    + "\n"
                )
        (root / "links" / "forum_links.nq").write_text(
            forum_links_to_nquads(forum_links, posts), encoding="utf-8"
        )
        sample = sample_links(forum_links, n=100, seed=config.seed)
        with open(root / "links" / "annotation_sample.jsonl", "w", encoding="utf-8") as fh:
            for link in sample:
                fh.write(
                    json.dumps(
                        {
                            "qualifiedName": list(link.qualified_name),
                            "postId": link.post_id,
                            "score": link.score,
                        },
                        ensure_ascii=False,
                    )
                    + "\n"
                )
        forum_summary = {"forumLinks": len(forum_links), "annotationSample": len(sample)}

    _write_json(
        root / "reports" / "link_summary.json",
        {"uniqueLabels": len(labels), "stats": stats, **forum_summary},
    )
    _update_manifest(root, "link", config)
    print(f"classified {len(labels)} unique labels")
    return EXIT_OK


# ---------------------------------------------------------------------------
# posts


def cmd_posts(config: RunConfig) -> int:
    config.validate()
    root = _ensure_layout(config.output_dir)
    if not config.post_dump_path:
        raise MissingArtifact("postDumpPath")
    if not Path(config.post_dump_path).exists():
        raise MissingArtifact("postDumpPath")
    result = ingest_posts(config.post_dump_path)
    with open(root / "posts" / "posts.jsonl", "w", encoding="utf-8") as fh:
        for post in result.posts:
            fh.write(
                json.dumps(
                    {
                        "id": post.post_id,
                        "postTypeId": 1,
                        "title": post.title,
                        "body": post.question_body,
                        "tags": list(post.tags),
                        "score": post.votes,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
            for answer in post.answers:
                fh.write(
                    json.dumps(
                        {
                            "id": answer.answer_id,
                            "postTypeId": 2,
                            "parentId": post.post_id,
                            "body": answer.body,
                            "score": answer.votes,
                        },
                        ensure_ascii=False,
                    )
                    + "\n"
                )
    _write_json(
        root / "reports" / "posts_summary.json",
        {
            "posts": len(result.posts),
            "answers": sum(len(p.answers) for p in result.posts),
            "skippedRows": result.skipped,
        },
    )
    _update_manifest(root, "posts", config)
    print(f"ingested {len(result.posts)} posts ({result.skipped} rows skipped)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# suggest / eval / coverage


def cmd_suggest(config: RunConfig, query: str | None = None, top_n: int = 10) -> int:
    config.validate()
    root = _ensure_layout(config.output_dir)
    graphs = _load_graphs(root)
    db = build_pathdb(graphs, max_len=config.path_max_len)
    save_pathdb(db, root / "pathdb" / "pathdb.jsonl")
    _write_json(
        root / "reports" / "suggest_summary.json",
        {
            "graphs": len(graphs),
            "paths": len(db.paths),
            "totalSuccessorCount": db.total_successor_count(),
            "maxLen": db.max_len,
        },
    )
    _update_manifest(root, "suggest", config)
    if query:
        ranked = suggest(db, tuple(query.split(",")), top_n=top_n)
        print(json.dumps([{"label": label, "count": count} for label, count in ranked], indent=2))
    else:
        print(f"path database: {len(db.paths)} paths from {len(graphs)} graphs")
    return EXIT_OK


def cmd_eval(config: RunConfig) -> int:
    config.validate()
    root = _ensure_layout(config.output_dir)
    graphs = _load_graphs(root)
    reports = kfold_eval(graphs, k=config.folds, max_len=config.path_max_len, seed=config.seed)
    _write_json(root / "reports" / "kfold.json", [r.as_dict() for r in reports])
    rows = [
        [
            str(r.path_length),
            f"{r.found_fraction:.3f}",
            f"{r.with_successors_fraction:.3f}",
            f"{r.avg_successors:.2f}",
        ]
        for r in reports
    ]
    table = _table(["length", "found", "with-successors", "avg-successors"], rows)
    (root / "reports" / "kfold.txt").write_text(table, encoding="utf-8")
    _update_manifest(root, "eval", config)
    print(table, end="")
    return EXIT_OK


def cmd_coverage(config: RunConfig) -> int:
    config.validate()
    root = _ensure_layout(config.output_dir)
    paths = _gather_files(config.input_paths, (".py", ".ipynb"))
    if not (root / "graphs").exists() or not any((root / "graphs").glob("*.json")):
        raise MissingArtifact("graphs (run `codegraph analyze --format json|both` first)")
    pairs = []
    missing = 0
    seen: set[str] = set()
    for p in paths:
        try:
            source = load_source_file(str(p), p.read_bytes())
            tree = parse_source(source)
        except (SourceSyntaxError, EncodingError, NotebookFormatError, OSError):
            missing += 1
            continue
        if source.digest in seen:
            continue
        seen.add(source.digest)
        graph_path = root / "graphs" / f"{source.digest}.json"
        if not graph_path.exists():
            missing += 1
            continue
        graph = from_json(json.loads(graph_path.read_text(encoding="utf-8")))
        pairs.append((tree, graph))
    report = corpus_coverage(pairs)
    _write_json(
        root / "reports" / "coverage.json",
        {**report.as_dict(), "skipped": missing},
    )
    rows = [
        [f.file, str(f.ast_call_count), str(f.covered_call_count), f"{f.fraction:.3f}"]
        for f in report.per_file
    ]
    rows.append(["(mean)", "", "", f"{report.mean:.3f}"])
    rows.append(["(stddev)", "", "", f"{report.stddev:.3f}"])
    (root / "reports" / "coverage.txt").write_text(
        _table(["file", "calls", "covered", "fraction"], rows), encoding="utf-8"
    )
    _update_manifest(root, "coverage", config)
    print(f"coverage over {len(pairs)} files: mean {report.mean:.3f}, stddev {report.stddev:.3f}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse default exits with 2; we use 1
        raise ConfigError(message)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", action="append", default=[], help="input file or directory (repeatable)")
    parser.add_argument("--out", default="out", help="output directory (default: out)")
    parser.add_argument("--format", default="both", choices=["nquads", "json", "both"])
    parser.add_argument("--timeout", type=float, default=60.0, help="per-file analysis budget, seconds")
    parser.add_argument("--workers", type=int, default=None, help="worker pool size (env CODEGRAPH_WORKERS)")
    parser.add_argument("--import-threshold", type=int, default=1000, help="minimum import count for docs extraction")
    parser.add_argument("--path-max-len", type=int, default=3)
    parser.add_argument("--folds", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--posts", default=None, help="post dump (XML rows or JSON lines)")
    parser.add_argument("--doc-index", default=None, help="documentation index (JSON lines)")


def _config_from(args: argparse.Namespace) -> RunConfig:
    workers = args.workers
    if workers is None:
        workers = int(os.environ.get("CODEGRAPH_WORKERS", "1"))
    return RunConfig(
        input_paths=args.input,
        output_dir=args.out,
        format=args.format,
        timeout_seconds=args.timeout,
        workers=workers,
        import_threshold=args.import_threshold,
        path_max_len=args.path_max_len,
        folds=args.folds,
        seed=args.seed,
        post_dump_path=args.posts,
        doc_index_path=args.doc_index,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="codegraph", description=__doc__)
    parser.add_argument("--version", action="version", version=f"codegraph {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("analyze", "parse, deduplicate, and analyze a corpus into program graphs"),
        ("docs", "extract documentation entries and class hierarchies"),
        ("link", "link graph labels to documentation (and posts, when present)"),
        ("posts", "ingest a forum post dump"),
        ("suggest", "build the path database for call suggestion"),
        ("eval", "k-fold path/successor statistics"),
        ("coverage", "AST-call coverage of analyzed graphs"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        if name == "suggest":
            p.add_argument("--query", default=None, help="comma-separated label path to query")
            p.add_argument("--top", type=int, default=10)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = _config_from(args)
        if args.command == "analyze":
            return cmd_analyze(config)
        if args.command == "docs":
            return cmd_docs(config)
        if args.command == "link":
            return cmd_link(config)
        if args.command == "posts":
            return cmd_posts(config)
        if args.command == "suggest":
            return cmd_suggest(config, query=args.query, top_n=args.top)
        if args.command == "eval":
            return cmd_eval(config)
        if args.command == "coverage":
            return cmd_coverage(config)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, MissingArtifact, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TooFewGraphs as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
