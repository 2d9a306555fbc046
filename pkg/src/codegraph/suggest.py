"""Corpus-wide path database over dataflow edges, for call suggestion.

A path is a simple walk over call nodes along flowsTo edges (argument
ordinals ignored, reads and writes excluded), identified by its sequence of
labels. Every walk of length 1..maxLen becomes a key; each outgoing flowsTo
edge from the walk's end to another call node records that call's label as
a successor occurrence.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .graphmodel import ProgramGraph

DEFAULT_MAX_LEN = 3


@dataclass
class PathDB:
    """Map from label paths to successor-label multisets."""

    max_len: int = DEFAULT_MAX_LEN
    paths: dict[tuple[str, ...], Counter] = field(default_factory=dict)
    provenance: set[str] = field(default_factory=set)

    def total_successor_count(self) -> int:
        return sum(sum(c.values()) for c in self.paths.values())


def _call_adjacency(graph: ProgramGraph) -> tuple[dict[str, str], dict[str, list[str]]]:
    """Labels and deduplicated call-to-call flowsTo successors."""
    labels = {
        n.id: n.rendered_label() or "" for n in graph.nodes.values() if n.kind == "call"
    }
    succ: dict[str, set[str]] = {node_id: set() for node_id in labels}
    for edge in graph.edges:
        if edge.kind == "flowsTo" and edge.src in labels and edge.dst in labels:
            succ[edge.src].add(edge.dst)
    return labels, {k: sorted(v) for k, v in succ.items()}


def _record_walks(graph: ProgramGraph, max_len: int, db: PathDB) -> bool:
    labels, succ = _call_adjacency(graph)
    recorded = False

    def visit(walk: list[str]) -> None:
        nonlocal recorded
        recorded = True
        key = tuple(labels[n] for n in walk)
        counter = db.paths.setdefault(key, Counter())
        tail = walk[-1]
        for nxt in succ[tail]:
            counter[labels[nxt]] += 1
        if len(walk) < max_len:
            for nxt in succ[tail]:
                if nxt not in walk:  # simple walks only
                    walk.append(nxt)
                    visit(walk)
                    walk.pop()

    for start in sorted(labels):
        visit([start])
    return recorded


def build_pathdb(graphs: list[ProgramGraph], max_len: int = DEFAULT_MAX_LEN) -> PathDB:
    """Enumerate every simple call-node walk of length <= max_len per graph."""
    if not 1 <= max_len <= 5:
        raise ValueError("max_len must be in 1..5")
    db = PathDB(max_len=max_len)
    for graph in graphs:
        if _record_walks(graph, max_len, db):
            db.provenance.add(graph.digest)
    return db


def merge_pathdbs(a: PathDB, b: PathDB) -> PathDB:
    """Associative merge of partial databases (worker-pool reduction step)."""
    if a.max_len != b.max_len:
        raise ValueError("cannot merge path databases with different max_len")
    out = PathDB(max_len=a.max_len)
    for src in (a, b):
        for key, counter in src.paths.items():
            out.paths.setdefault(key, Counter()).update(counter)
        out.provenance |= src.provenance
    return out


def enumerate_label_paths(graph: ProgramGraph, max_len: int) -> set[tuple[str, ...]]:
    """Distinct label paths present in one graph, lengths 1..max_len."""
    labels, succ = _call_adjacency(graph)
    out: set[tuple[str, ...]] = set()

    def visit(walk: list[str]) -> None:
        out.add(tuple(labels[n] for n in walk))
        if len(walk) < max_len:
            for nxt in succ[walk[-1]]:
                if nxt not in walk:
                    walk.append(nxt)
                    visit(walk)
                    walk.pop()

    for start in sorted(labels):
        visit([start])
    return out


def suggest(db: PathDB, prefix: tuple[str, ...], top_n: int = 10) -> list[tuple[str, int]]:
    """Most common successors after a label path; empty when the path is unknown."""
    if top_n < 1:
        raise ValueError("top_n must be >= 1")
    counter = db.paths.get(tuple(prefix))
    if not counter:
        return []
    ranked = sorted(counter.items(), key=lambda item: (-item[1], item[0]))
    return ranked[:top_n]


def save_pathdb(db: PathDB, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(
            json.dumps(
                {"maxLen": db.max_len, "provenance": sorted(db.provenance)},
                ensure_ascii=False,
            )
            + "\n"
        )
        for key in sorted(db.paths):
            record = {
                "path": list(key),
                "successors": {label: count for label, count in sorted(db.paths[key].items())},
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def load_pathdb(path: str | Path) -> PathDB:
    db = PathDB()
    with open(path, encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        db.max_len = header.get("maxLen", DEFAULT_MAX_LEN)
        db.provenance = set(header.get("provenance", []))
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            db.paths[tuple(rec["path"])] = Counter(rec["successors"])
    return db
