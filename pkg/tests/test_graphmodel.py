from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from codegraph.frontend import SourceLocation
from codegraph.graphmodel import (
    GraphEdge,
    GraphNode,
    LABEL_NAMESPACE,
    MAX_PATH_COMPONENTS,
    OVERFLOW_SENTINEL,
    ProgramGraph,
    SealedGraphError,
    UnknownEndpoint,
    cap_path,
    label_iri,
    make_node_id,
)

LOC = SourceLocation("t.py", 1, 1, 1, 10)


def test_node_id_deterministic_and_injective():
    a = make_node_id("d" * 32, "main", 0, "call")
    assert a == make_node_id("d" * 32, "main", 0, "call")
    assert a != make_node_id("d" * 32, "main", 1, "call")
    assert make_node_id("d" * 32, "main", 0, "call") != make_node_id("d" * 32, "f", 0, "call")
    assert len(a) == 20 and set(a) <= set("0123456789abcdef")


def test_label_iri_matches_published_form():
    assert label_iri(("pandas", "read_csv")) == LABEL_NAMESPACE + "pandas.read_csv"
    assert (
        label_iri(("pandas", "read_csv", "fillna"))
        == LABEL_NAMESPACE + "pandas.read_csv.fillna"
    )


def test_label_iri_percent_encodes():
    iri = label_iri(("weird name",))
    assert " " not in iri and "%20" in iri


def test_label_iri_shared_across_invocations():
    assert label_iri(("a", "b")) == label_iri(("a", "b"))


@given(st.lists(st.text(alphabet="abc_", min_size=1, max_size=4), min_size=1, max_size=25))
@settings(max_examples=200, deadline=None)
def test_cap_path_bounds_and_preserves_short_paths(parts):
    capped = cap_path(tuple(parts))
    assert len(capped) <= MAX_PATH_COMPONENTS
    if len(parts) <= MAX_PATH_COMPONENTS:
        assert capped == tuple(parts)
    else:
        assert capped[-1] == OVERFLOW_SENTINEL
        assert capped[:-1] == tuple(parts[: MAX_PATH_COMPONENTS - 1])


def _two_node_graph():
    g = ProgramGraph("ab" * 16)
    g.add_node(GraphNode(id="n1", kind="call", label=("m", "f"), location=LOC))
    g.add_node(GraphNode(id="n2", kind="call", label=("m", "g"), location=LOC))
    return g


def test_merge_edge_is_idempotent():
    g = _two_node_graph()
    edge = GraphEdge("n1", "n2", "flowsTo", ordinal=0)
    g.merge_edge(edge)
    g.merge_edge(edge)
    assert len(g.edges) == 1


def test_ordinal_distinguishes_edges():
    g = _two_node_graph()
    g.merge_edge(GraphEdge("n1", "n2", "flowsTo", ordinal=0))
    g.merge_edge(GraphEdge("n1", "n2", "flowsTo", ordinal=1))
    assert len(g.edges) == 2


def test_missing_endpoint_rejected():
    g = _two_node_graph()
    with pytest.raises(UnknownEndpoint):
        g.merge_edge(GraphEdge("n1", "missing", "flowsTo", ordinal=0))


def test_sealed_graph_refuses_mutation():
    g = _two_node_graph().seal()
    with pytest.raises(SealedGraphError):
        g.add_node(GraphNode(id="n3", kind="call", label=("x",), location=LOC))


def test_validate_flags_structural_problems():
    g = ProgramGraph("cd" * 16)
    g.add_node(GraphNode(id="c", kind="call", label=None, location=None))  # missing both
    g.add_node(GraphNode(id="k", kind="constant"))  # constant without value
    problems = g.validate()
    assert any("missing label" in p for p in problems)
    assert any("constant without value" in p for p in problems)


def test_validate_rejects_precedes_between_non_calls():
    g = ProgramGraph("ef" * 16)
    g.add_node(GraphNode(id="c", kind="call", label=("m", "f"), location=LOC))
    g.add_node(GraphNode(id="r", kind="read", label=("m", "f", "x"), location=LOC))
    g.edges.add(GraphEdge("c", "r", "immediatelyPrecedes"))
    assert any("must connect calls" in p for p in g.validate())


def test_graph_id_is_digest_namespaced():
    g = ProgramGraph("0" * 32)
    assert g.graph_id.endswith("/program/" + "0" * 32)


def test_labels_map_covers_exactly_labeled_nodes():
    g = _two_node_graph()
    g.add_node(GraphNode(id="k", kind="constant"))
    assert set(g.labels) == {"n1", "n2"}
    assert g.labels["n1"] == label_iri(("m", "f"))
