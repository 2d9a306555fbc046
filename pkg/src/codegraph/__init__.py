"""codegraph: per-program code knowledge graphs from Python source.

Pipeline: parse and deduplicate files, abstractly interpret every entry
point into a dataflow/control-flow graph over API access paths, serialize
the graphs as named-graph N-Quads or JSON, link labels to extracted
documentation and forum posts, and mine the corpus for call suggestions.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .dataflow import analyze_program, enumerate_entrypoints
from .docs import build_index, class_hierarchy, extract_docs
from .evaluation import corpus_coverage, coverage_check, kfold_eval
from .frontend import (
    SourceFile,
    collect_imports,
    dedupe,
    load_source_file,
    parse_source,
)
from .graphmodel import ProgramGraph, label_iri, make_node_id
from .link import build_post_index, ingest_posts, link_path, link_posts, link_stats
from .serialize import docs_to_nquads, forum_links_to_nquads, from_json, to_json, to_nquads
from .suggest import build_pathdb, suggest


def analyze_source(source: str | bytes, path: str = "<memory>", budget_seconds: float | None = None):
    """Convenience: analyze one in-memory program; returns (tree, graph)."""
    content = source.encode("utf-8") if isinstance(source, str) else source
    file = load_source_file(path, content)
    tree = parse_source(file)
    graph = analyze_program(tree, collect_imports(tree), file.digest, budget_seconds=budget_seconds)
    return tree, graph
