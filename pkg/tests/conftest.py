from __future__ import annotations

import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).resolve().parent
FIXTURES = TESTS_DIR / "fixtures"
sys.path.insert(0, str(TESTS_DIR))  # make `oracles` importable from any cwd

from codegraph.dataflow import analyze_program
from codegraph.frontend import collect_imports, load_source_file, parse_source


def analyze_text(source: str, name: str = "prog.py", budget: float | None = None):
    """Parse+analyze an in-memory program with a stable path string."""
    file = load_source_file(name, source.encode("utf-8"))
    tree = parse_source(file)
    graph = analyze_program(tree, collect_imports(tree), file.digest, budget_seconds=budget)
    return tree, graph


def analyze_fixture(path: Path, name: str | None = None):
    """Analyze a fixture file under a stable (machine-independent) name."""
    file = load_source_file(name or path.name, path.read_bytes())
    tree = parse_source(file)
    graph = analyze_program(tree, collect_imports(tree), file.digest)
    return tree, graph


def labels_of(graph) -> set[str]:
    return {n.rendered_label() for n in graph.nodes.values() if n.label}


def edge_views(graph) -> set[tuple]:
    """(src label, src kind, edge kind, ordinal, dst label, dst kind) views."""
    out = set()
    for e in graph.edges:
        src, dst = graph.nodes[e.src], graph.nodes[e.dst]
        out.add((src.rendered_label(), src.kind, e.kind, e.ordinal, dst.rendered_label(), dst.kind))
    return out


@pytest.fixture(scope="session")
def corpus25_graphs():
    pairs = []
    for path in sorted((FIXTURES / "corpus25").iterdir()):
        pairs.append(analyze_fixture(path))
    return pairs


def random_straight_line_program(rng) -> str:
    """Straight-line program whose every call resolves through an import."""
    mods = ["alpha", "beta", "gamma"]
    lines = [f"import {m}" for m in mods]
    names: list[str] = []
    for i in range(rng.randint(1, 8)):
        var = f"v{i}"
        if names and rng.random() < 0.5:
            base = rng.choice(names)
            lines.append(f"{var} = {base}.{rng.choice('mnop')}{i}({rng.randint(0, 9)})")
        else:
            mod = rng.choice(mods)
            lines.append(f"{var} = {mod}.make{i}('s{i}')")
        names.append(var)
    return "\n".join(lines) + "\n"


def make_synthetic_corpus(seed: int = 7, count: int = 20):
    """Small random call graphs (<= 8 calls each) built straight on the model.

    Chain-heavy shapes over a compact label alphabet, so short paths recur
    across graphs while longer ones thin out.
    """
    import random

    from codegraph.frontend import SourceLocation
    from codegraph.graphmodel import GraphEdge, GraphNode, ProgramGraph, make_node_id

    rng = random.Random(seed)
    alphabet = [
        "pandas.read_csv",
        "pandas.read_csv.fillna",
        "pandas.read_csv.merge",
        "sklearn.svm.SVC",
        "sklearn.svm.SVC.fit",
        "sklearn.svm.SVC.predict",
        "numpy.load",
        "numpy.save",
    ]
    graphs = []
    for g_index in range(count):
        digest = f"{g_index:032x}"
        graph = ProgramGraph(digest)
        n = rng.randint(3, 8)
        ids = []
        for i in range(n):
            label = tuple(rng.choice(alphabet).split("."))
            node_id = make_node_id(digest, "main", i, "call")
            graph.add_node(
                GraphNode(
                    id=node_id,
                    kind="call",
                    label=label,
                    location=SourceLocation(f"g{g_index}.py", i + 1, 1, i + 1, 20),
                )
            )
            ids.append(node_id)
        for i in range(n - 1):  # backbone chain
            graph.merge_edge(GraphEdge(ids[i], ids[i + 1], "flowsTo", ordinal=0))
        for _ in range(rng.randint(0, 2)):  # a few skip edges
            i = rng.randrange(n - 1)
            j = rng.randrange(i + 1, n)
            graph.merge_edge(GraphEdge(ids[i], ids[j], "flowsTo", ordinal=1))
        graphs.append(graph.seal())
    return graphs
