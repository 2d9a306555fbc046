"""RDF N-Quads and JSON serialization of analysis output.

Each program graph serializes into its own named graph; documentation and
forum links go into fixed shared graphs. N-Quads output is deterministic:
fixed escaping, one quad per line, lines sorted bytewise. Because N-Quads
cannot annotate an edge, ordinal-carrying edges are reified through an
intermediate flow node that carries hasOrdinalPosition.
"""

from __future__ import annotations

import hashlib
import json
from typing import Iterable

from .docs import DocEntry
from .frontend import SourceLocation
from .graphmodel import (
    ConstantLiteral,
    DOCSTRINGS_GRAPH_IRI,
    EDGE_KINDS,
    FORUM_GRAPH_IRI,
    GraphEdge,
    GraphNode,
    NODE_KINDS,
    NODE_NAMESPACE,
    ProgramGraph,
    label_iri,
    render_path,
)
from .link import ForumLink, ForumPost

G4C = "http://purl.org/twc/graph4code/"
RDFS_LABEL = "http://www.w3.org/2000/01/rdf-schema#label"
RDFS_SUBCLASSOF = "http://www.w3.org/2000/01/rdf-schema#subClassOf"
SKOS_DEFINITION = "http://www.w3.org/2004/02/skos/core#definition"
SCHEMA_ABOUT = "http://schema.org/about"
SCHEMA_NAME = "http://schema.org/name"
SCHEMA_SUGGESTED_ANSWER = "http://schema.org/suggestedAnswer"
SIOC_CONTENT = "http://rdfs.org/sioc/ns#content"
XSD_INTEGER = "http://www.w3.org/2001/XMLSchema#integer"
XSD_DOUBLE = "http://www.w3.org/2001/XMLSchema#double"
XSD_BOOLEAN = "http://www.w3.org/2001/XMLSchema#boolean"
POST_NAMESPACE = G4C + "post/"


class InvalidGraph(Exception):
    """Graph failed structural validation before serialization."""


class SchemaError(Exception):
    """A JSON graph document does not match the expected schema."""


def _escape(text: str) -> str:
    out = []
    for ch in text:
        if ch == "\\":
            out.append("\\\\")
        elif ch == '"':
            out.append('\\"')
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\r":
            out.append("\\r")
        elif ch == "\t":
            out.append("\\t")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    return "".join(out)


def _iri(value: str) -> str:
    return f"<{value}>"


def _string(value: str) -> str:
    return f'"{_escape(value)}"'


def _typed(value: str, datatype: str) -> str:
    return f'"{_escape(value)}"^^<{datatype}>'


def _constant_term(const: ConstantLiteral) -> str:
    if const.datatype == "integer":
        return _typed(str(const.value), XSD_INTEGER)
    if const.datatype == "double":
        return _typed(repr(const.value), XSD_DOUBLE)
    if const.datatype == "boolean":
        return _typed("true" if const.value else "false", XSD_BOOLEAN)
    if const.datatype == "none":
        return _string("None")
    return _string(str(const.value))


def _ordinal_term(ordinal: int | str) -> str:
    if isinstance(ordinal, int):
        return _typed(str(ordinal), XSD_INTEGER)
    return _string(ordinal)


def _location_term(loc: SourceLocation) -> str:
    return _string(f"{loc.file}:{loc.start_line}:{loc.start_col}:{loc.end_line}:{loc.end_col}")


def _quad(subject: str, predicate: str, obj: str, graph: str) -> str:
    return f"{subject} {_iri(predicate)} {obj} {_iri(graph)} ."


def _flow_mid_iri(digest: str, edge: GraphEdge) -> str:
    key = f"{digest}|{edge.src}|{edge.dst}|{edge.kind}|{edge.ordinal!r}"
    return NODE_NAMESPACE + "flow-" + hashlib.sha256(key.encode("utf-8")).hexdigest()[:20]


def _node_iri(node_id: str) -> str:
    return NODE_NAMESPACE + node_id


def to_nquads(graph: ProgramGraph) -> str:
    """Serialize one sealed ProgramGraph as N-Quads in its named graph."""
    problems = graph.validate()
    if problems:
        raise InvalidGraph("; ".join(problems[:5]))
    g = graph.graph_id
    lines: list[str] = []

    for node in graph.nodes.values():
        if node.kind == "constant":
            continue  # literal values are inlined at their constantArg edges
        subj = _iri(_node_iri(node.id))
        if node.label:
            lines.append(_quad(subj, RDFS_LABEL, _string(render_path(node.label)), g))
        if node.location is not None:
            lines.append(_quad(subj, G4C + "sourceLocation", _location_term(node.location), g))
        for name in sorted(node.value_names):
            lines.append(_quad(subj, G4C + "valueName", _string(name), g))
        if node.kind == "import":
            lines.append(_quad(subj, G4C + "isImport", _typed("true", XSD_BOOLEAN), g))
        if node.element_index is not None:
            lines.append(_quad(subj, G4C + "elementIndex", _typed(str(node.element_index), XSD_INTEGER), g))

    for edge in graph.edges:
        subj = _iri(_node_iri(edge.src))
        if edge.kind == "constantArg":
            obj = _constant_term(graph.nodes[edge.dst].constant)  # type: ignore[arg-type]
        else:
            obj = _iri(_node_iri(edge.dst))
        pred = G4C + edge.kind
        if edge.kind in ("flowsTo", "constantArg") and edge.ordinal is not None:
            mid = _iri(_flow_mid_iri(graph.digest, edge))
            lines.append(_quad(subj, pred, mid, g))
            lines.append(_quad(mid, pred, obj, g))
            lines.append(_quad(mid, G4C + "hasOrdinalPosition", _ordinal_term(edge.ordinal), g))
        else:
            lines.append(_quad(subj, pred, obj, g))

    lines.sort()
    return "\n".join(lines) + ("\n" if lines else "")


def docs_to_nquads(entries: Iterable[DocEntry]) -> str:
    """Serialize documentation entries into the fixed docstrings graph."""
    g = DOCSTRINGS_GRAPH_IRI
    lines: list[str] = []
    for entry in entries:
        subj = _iri(label_iri(entry.qualified_name))
        lines.append(_quad(subj, RDFS_LABEL, _string(render_path(entry.qualified_name)), g))
        if entry.docstring:
            lines.append(_quad(subj, SKOS_DEFINITION, _string(entry.docstring), g))
        for param in entry.params:
            lines.append(_quad(subj, G4C + "param", _string(param.name), g))
        if entry.returns:
            lines.append(_quad(subj, G4C + "return", _string(entry.returns), g))
        for base in entry.bases:
            lines.append(_quad(subj, RDFS_SUBCLASSOF, _iri(label_iri(base)), g))
    lines = sorted(set(lines))
    return "\n".join(lines) + ("\n" if lines else "")


def forum_links_to_nquads(links: Iterable[ForumLink], posts: Iterable[ForumPost]) -> str:
    """Serialize post metadata plus about-links into the fixed forum graph."""
    g = FORUM_GRAPH_IRI
    by_id = {post.post_id: post for post in posts}
    lines: set[str] = set()
    linked_posts: set[int] = set()
    for link in links:
        post = by_id.get(link.post_id)
        if post is None:
            continue
        linked_posts.add(post.post_id)
        subj = _iri(POST_NAMESPACE + str(post.post_id))
        lines.add(_quad(subj, SCHEMA_ABOUT, _iri(label_iri(link.qualified_name)), g))
    for post_id in linked_posts:
        post = by_id[post_id]
        subj = _iri(POST_NAMESPACE + str(post.post_id))
        lines.add(_quad(subj, SCHEMA_NAME, _string(post.title), g))
        for answer in post.answers:
            ans = _iri(POST_NAMESPACE + str(answer.answer_id))
            lines.add(_quad(subj, SCHEMA_SUGGESTED_ANSWER, ans, g))
            lines.add(_quad(ans, SIOC_CONTENT, _string(answer.body), g))
    ordered = sorted(lines)
    return "\n".join(ordered) + ("\n" if ordered else "")


# ---------------------------------------------------------------------------
# JSON graph documents


def _location_record(loc: SourceLocation | None) -> dict | None:
    if loc is None:
        return None
    return {
        "file": loc.file,
        "startLine": loc.start_line,
        "startCol": loc.start_col,
        "endLine": loc.end_line,
        "endCol": loc.end_col,
    }


def _ordinal_sort_key(ordinal: int | str | None) -> tuple:
    if ordinal is None:
        return (0, 0, "")
    if isinstance(ordinal, int):
        return (1, ordinal, "")
    return (2, 0, ordinal)


def to_json(graph: ProgramGraph) -> dict:
    """Lossless JSON document for one ProgramGraph; arrays sorted for determinism."""
    nodes = []
    for node in sorted(graph.nodes.values(), key=lambda n: n.id):
        nodes.append(
            {
                "id": node.id,
                "kind": node.kind,
                "label": list(node.label) if node.label else None,
                "location": _location_record(node.location),
                "valueNames": sorted(node.value_names),
                "constant": (
                    {"value": node.constant.value, "datatype": node.constant.datatype}
                    if node.constant
                    else None
                ),
                "elementIndex": node.element_index,
            }
        )
    edges = []
    for edge in sorted(
        graph.edges, key=lambda e: (e.src, e.dst, e.kind, _ordinal_sort_key(e.ordinal))
    ):
        edges.append({"src": edge.src, "dst": edge.dst, "kind": edge.kind, "ordinal": edge.ordinal})
    return {"program": graph.graph_id, "digest": graph.digest, "nodes": nodes, "edges": edges}


_NODE_FIELDS = {"id", "kind", "label", "location", "valueNames", "constant", "elementIndex"}
_EDGE_FIELDS = {"src", "dst", "kind", "ordinal"}


def from_json(doc: dict) -> ProgramGraph:
    """Rebuild a ProgramGraph from its JSON document; inverse of to_json."""
    if not isinstance(doc, dict):
        raise SchemaError("document must be an object")
    for key in ("program", "digest", "nodes", "edges"):
        if key not in doc:
            raise SchemaError(f"missing field {key!r}")
    graph = ProgramGraph(digest=doc["digest"])
    for rec in doc["nodes"]:
        if not isinstance(rec, dict) or not _NODE_FIELDS.issubset(rec):
            raise SchemaError(f"node record missing fields: {rec!r}")
        if rec["kind"] not in NODE_KINDS:
            raise SchemaError(f"unknown node kind {rec['kind']!r}")
        loc = rec["location"]
        location = None
        if loc is not None:
            try:
                location = SourceLocation(
                    loc["file"], loc["startLine"], loc["startCol"], loc["endLine"], loc["endCol"]
                )
            except (KeyError, TypeError) as exc:
                raise SchemaError(f"bad location record: {loc!r}") from exc
        const = rec["constant"]
        constant = None
        if const is not None:
            try:
                constant = ConstantLiteral(const["value"], const["datatype"])
            except (KeyError, TypeError) as exc:
                raise SchemaError(f"bad constant record: {const!r}") from exc
        graph.add_node(
            GraphNode(
                id=rec["id"],
                kind=rec["kind"],
                label=tuple(rec["label"]) if rec["label"] else None,
                location=location,
                value_names=set(rec["valueNames"]),
                constant=constant,
                element_index=rec["elementIndex"],
            )
        )
    for rec in doc["edges"]:
        if not isinstance(rec, dict) or not _EDGE_FIELDS.issubset(rec):
            raise SchemaError(f"edge record missing fields: {rec!r}")
        if rec["kind"] not in EDGE_KINDS:
            raise SchemaError(f"unknown edge kind {rec['kind']!r}")
        ordinal = rec["ordinal"]
        if ordinal is not None and not isinstance(ordinal, (int, str)):
            raise SchemaError(f"bad ordinal {ordinal!r}")
        try:
            graph.merge_edge(
                GraphEdge(src=rec["src"], dst=rec["dst"], kind=rec["kind"], ordinal=ordinal)
            )
        except Exception as exc:
            raise SchemaError(str(exc)) from exc
    return graph.seal()


def graphs_equal(a: ProgramGraph, b: ProgramGraph) -> bool:
    """Structural equality: digests, node contents, and edge sets."""
    if a.digest != b.digest or set(a.nodes) != set(b.nodes) or a.edges != b.edges:
        return False
    for node_id, node in a.nodes.items():
        other = b.nodes[node_id]
        if (
            node.kind != other.kind
            or node.label != other.label
            or node.location != other.location
            or node.value_names != other.value_names
            or node.constant != other.constant
            or node.element_index != other.element_index
        ):
            return False
    return True


def dump_json(doc: dict) -> str:
    return json.dumps(doc, ensure_ascii=False, sort_keys=True, indent=None, separators=(",", ":"))
