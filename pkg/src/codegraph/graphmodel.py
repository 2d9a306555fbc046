"""Knowledge-graph data model: nodes, typed edges, labels, per-program graphs.

Every analyzed program becomes one named graph. Nodes carry dotted
access-path labels; two invocations of the same qualified call share a
label IRI but never a node, which is what lets separate program graphs
stay loosely coupled.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from urllib.parse import quote

from .frontend import SourceLocation

LABEL_NAMESPACE = "http://purl.org/twc/graph4code/python/"
PROGRAM_NAMESPACE = "http://purl.org/twc/graph4code/program/"
NODE_NAMESPACE = "http://purl.org/twc/graph4code/node/"
DOCSTRINGS_GRAPH_IRI = "http://purl.org/twc/graph4code/docstrings"
FORUM_GRAPH_IRI = "http://purl.org/twc/graph4code/forum"

MAX_PATH_COMPONENTS = 20
OVERFLOW_SENTINEL = "…"  # "…", terminal marker for truncated paths

NODE_KINDS = frozenset(
    {"call", "read", "write", "import", "constant", "tuple-element", "synthetic-param"}
)
EDGE_KINDS = frozenset(
    {"flowsTo", "immediatelyPrecedes", "constantArg", "reads", "writes", "hasElement"}
)
# Kinds that must carry both a label and a location.
_FULLY_LABELED = frozenset({"call", "read", "write", "import"})


class UnknownEndpoint(Exception):
    """Edge insertion referenced a node id absent from the graph."""


def cap_path(components: tuple[str, ...]) -> tuple[str, ...]:
    """Clamp a path to MAX_PATH_COMPONENTS, folding the tail into the sentinel."""
    if len(components) <= MAX_PATH_COMPONENTS:
        return components
    return components[: MAX_PATH_COMPONENTS - 1] + (OVERFLOW_SENTINEL,)


def render_path(components: tuple[str, ...]) -> str:
    return ".".join(components)


def label_iri(path: tuple[str, ...]) -> str:
    """Shared label IRI for a qualified access path."""
    if not path:
        raise ValueError("empty turtle path")
    return LABEL_NAMESPACE + quote(render_path(path), safe="._~-")


def make_node_id(digest: str, entrypoint: str, instruction_index: int, kind: str) -> str:
    """Deterministic node id: first 20 hex chars of a hash of the 4-tuple."""
    if instruction_index < 0:
        raise ValueError("instruction index must be >= 0")
    key = f"{digest}|{entrypoint}|{instruction_index}|{kind}"
    return hashlib.sha256(key.encode("utf-8")).hexdigest()[:20]


@dataclass(frozen=True)
class ConstantLiteral:
    """A literal argument value with its datatype tag."""

    value: object  # str | int | float | bool | None
    datatype: str  # "string" | "integer" | "double" | "boolean" | "none"


@dataclass
class GraphNode:
    id: str
    kind: str
    label: tuple[str, ...] | None = None
    location: SourceLocation | None = None
    value_names: set[str] = field(default_factory=set)
    constant: ConstantLiteral | None = None
    element_index: int | None = None

    def rendered_label(self) -> str | None:
        return render_path(self.label) if self.label else None


@dataclass(frozen=True)
class GraphEdge:
    src: str
    dst: str
    kind: str
    ordinal: int | str | None = None  # int position, keyword name, or absent


class SealedGraphError(Exception):
    """Mutation attempted on a sealed ProgramGraph."""


@dataclass(eq=False)
class ProgramGraph:
    """One program's analysis output: a named graph of nodes and typed edges."""

    digest: str
    nodes: dict[str, GraphNode] = field(default_factory=dict)
    edges: set[GraphEdge] = field(default_factory=set)
    sealed: bool = False

    @property
    def graph_id(self) -> str:
        return PROGRAM_NAMESPACE + self.digest

    @property
    def labels(self) -> dict[str, str]:
        """Map node id -> label IRI for every labeled node."""
        return {n.id: label_iri(n.label) for n in self.nodes.values() if n.label}

    def add_node(self, node: GraphNode) -> GraphNode:
        if self.sealed:
            raise SealedGraphError(self.digest)
        self.nodes[node.id] = node
        return node

    def merge_edge(self, edge: GraphEdge) -> None:
        """Insert an edge with set semantics; endpoints must already exist."""
        if self.sealed:
            raise SealedGraphError(self.digest)
        if edge.src not in self.nodes:
            raise UnknownEndpoint(f"unknown src node {edge.src!r}")
        if edge.dst not in self.nodes:
            raise UnknownEndpoint(f"unknown dst node {edge.dst!r}")
        self.edges.add(edge)

    def seal(self) -> "ProgramGraph":
        self.sealed = True
        return self

    def call_nodes(self) -> list[GraphNode]:
        return [n for n in self.nodes.values() if n.kind == "call"]

    def validate(self) -> list[str]:
        """Structural validation; returns a list of problems (empty = valid)."""
        problems: list[str] = []
        for node in self.nodes.values():
            if node.kind not in NODE_KINDS:
                problems.append(f"node {node.id}: unknown kind {node.kind!r}")
            if node.kind in _FULLY_LABELED:
                if not node.label:
                    problems.append(f"node {node.id} ({node.kind}): missing label")
                if node.location is None:
                    problems.append(f"node {node.id} ({node.kind}): missing location")
            if node.kind == "constant":
                if node.constant is None:
                    problems.append(f"node {node.id}: constant without value")
                if node.label:
                    problems.append(f"node {node.id}: constant must not carry a label")
            if (node.element_index is not None) != (node.kind == "tuple-element"):
                problems.append(f"node {node.id}: elementIndex present iff tuple-element")
            if node.label and len(node.label) > MAX_PATH_COMPONENTS:
                problems.append(f"node {node.id}: label exceeds path cap")
        for edge in self.edges:
            if edge.kind not in EDGE_KINDS:
                problems.append(f"edge {edge.src}->{edge.dst}: unknown kind {edge.kind!r}")
                continue
            src = self.nodes.get(edge.src)
            dst = self.nodes.get(edge.dst)
            if src is None or dst is None:
                problems.append(f"edge {edge.src}->{edge.dst}: dangling endpoint")
                continue
            if edge.kind == "immediatelyPrecedes":
                if src.kind != "call" or dst.kind != "call":
                    problems.append(f"edge {edge.src}->{edge.dst}: precedes must connect calls")
                if edge.src == edge.dst:
                    problems.append(f"edge {edge.src}: precedes must be irreflexive")
            if edge.kind == "constantArg":
                # Attribute writes of literals also carry constant arguments.
                if src.kind not in ("call", "write"):
                    problems.append(f"edge {edge.src}->{edge.dst}: constantArg from {src.kind}")
                if dst.kind != "constant":
                    problems.append(f"edge {edge.src}->{edge.dst}: constantArg to {dst.kind}")
            if edge.kind == "flowsTo" and edge.ordinal == 0:
                if dst.kind not in ("call", "read", "write"):
                    problems.append(
                        f"edge {edge.src}->{edge.dst}: receiver flow into {dst.kind} node"
                    )
        return problems
