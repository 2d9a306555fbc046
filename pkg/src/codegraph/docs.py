"""Documentation extraction from module source trees.

Works purely at the source level: no interpreter imports, no virtual
environments. The cost is that C-extension modules contribute nothing,
a known coverage gap accepted by design.
"""

from __future__ import annotations

import ast
import json
import logging
from dataclasses import dataclass, field

from .frontend import SyntaxTree, collect_imports

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ParamSpec:
    name: str
    has_default: bool = False
    annotation: str | None = None


@dataclass(frozen=True)
class DocEntry:
    """One documented class, function, or method."""

    qualified_name: tuple[str, ...]
    kind: str  # "class" | "function" | "method"
    docstring: str = ""
    params: tuple[ParamSpec, ...] = ()
    returns: str | None = None
    bases: tuple[tuple[str, ...], ...] = ()  # resolved base-class paths
    unresolved_bases: tuple[str, ...] = ()

    def rendered_name(self) -> str:
        return ".".join(self.qualified_name)


def _params_of(node: ast.FunctionDef | ast.AsyncFunctionDef) -> tuple[ParamSpec, ...]:
    a = node.args
    positional = a.posonlyargs + a.args
    n_defaults = len(a.defaults)
    specs: list[ParamSpec] = []
    for i, p in enumerate(positional):
        has_default = i >= len(positional) - n_defaults
        specs.append(ParamSpec(p.arg, has_default, _unparse(p.annotation)))
    if a.vararg:
        specs.append(ParamSpec("*" + a.vararg.arg, False, _unparse(a.vararg.annotation)))
    for p, default in zip(a.kwonlyargs, a.kw_defaults):
        specs.append(ParamSpec(p.arg, default is not None, _unparse(p.annotation)))
    if a.kwarg:
        specs.append(ParamSpec("**" + a.kwarg.arg, False, _unparse(a.kwarg.annotation)))
    return tuple(specs)


def _unparse(node: ast.expr | None) -> str | None:
    return None if node is None else ast.unparse(node)


def _dotted_parts(node: ast.expr) -> tuple[str, ...] | None:
    """Flatten a Name/Attribute chain like a.b.C; None for anything else."""
    parts: list[str] = []
    while isinstance(node, ast.Attribute):
        parts.append(node.attr)
        node = node.value
    if isinstance(node, ast.Name):
        parts.append(node.id)
        return tuple(reversed(parts))
    return None


def extract_docs(module_name: tuple[str, ...], tree: SyntaxTree) -> list[DocEntry]:
    """One entry per module-level def, class, and class-level def.

    Base classes resolve through the file's imports or same-module class
    names; anything else stays as an unresolved raw name.
    """
    imports = {b.local_name: b.qualified_path for b in collect_imports(tree) if not b.wildcard}
    local_classes = {
        stmt.name for stmt in tree.module.body if isinstance(stmt, ast.ClassDef)
    }

    def resolve_base(expr: ast.expr) -> tuple[str, ...] | str | None:
        if isinstance(expr, ast.Subscript):  # Generic[T] and friends
            expr = expr.value
        parts = _dotted_parts(expr)
        if parts is None:
            return None
        head, rest = parts[0], parts[1:]
        if head in imports:
            return imports[head] + rest
        if not rest and head in local_classes:
            return module_name + (head,)
        return ".".join(parts)

    entries: list[DocEntry] = []
    for stmt in tree.module.body:
        if isinstance(stmt, (ast.FunctionDef, ast.AsyncFunctionDef)):
            entries.append(
                DocEntry(
                    qualified_name=module_name + (stmt.name,),
                    kind="function",
                    docstring=ast.get_docstring(stmt) or "",
                    params=_params_of(stmt),
                    returns=_unparse(stmt.returns),
                )
            )
        elif isinstance(stmt, ast.ClassDef):
            resolved: list[tuple[str, ...]] = []
            unresolved: list[str] = []
            for base in stmt.bases:
                r = resolve_base(base)
                if isinstance(r, tuple):
                    resolved.append(r)
                elif isinstance(r, str):
                    unresolved.append(r)
            entries.append(
                DocEntry(
                    qualified_name=module_name + (stmt.name,),
                    kind="class",
                    docstring=ast.get_docstring(stmt) or "",
                    bases=tuple(resolved),
                    unresolved_bases=tuple(unresolved),
                )
            )
            for member in stmt.body:
                if isinstance(member, (ast.FunctionDef, ast.AsyncFunctionDef)):
                    entries.append(
                        DocEntry(
                            qualified_name=module_name + (stmt.name, member.name),
                            kind="method",
                            docstring=ast.get_docstring(member) or "",
                            params=_params_of(member),
                            returns=_unparse(member.returns),
                        )
                    )
    return entries


class _TrieNode:
    __slots__ = ("children", "entry")

    def __init__(self) -> None:
        self.children: dict[str, _TrieNode] = {}
        self.entry: DocEntry | None = None


@dataclass
class DocIndex:
    """Exact and longest-prefix lookup over documentation entries."""

    entries: dict[str, DocEntry] = field(default_factory=dict)
    duplicate_warnings: int = 0
    _root: _TrieNode = field(default_factory=_TrieNode, repr=False)

    def add(self, entry: DocEntry) -> None:
        key = entry.rendered_name()
        if key in self.entries:
            self.duplicate_warnings += 1
            logger.warning("duplicate documentation entry for %s; keeping the later one", key)
        self.entries[key] = entry
        node = self._root
        for part in entry.qualified_name:
            node = node.children.setdefault(part, _TrieNode())
        node.entry = entry

    def exact(self, path: tuple[str, ...]) -> DocEntry | None:
        return self.entries.get(".".join(path))

    def longest_prefix(self, path: tuple[str, ...]) -> DocEntry | None:
        """Deepest indexed entry whose path is a (possibly full) prefix of ``path``."""
        node = self._root
        best: DocEntry | None = None
        for part in path:
            node = node.children.get(part)
            if node is None:
                break
            if node.entry is not None:
                best = node.entry
        return best

    def __len__(self) -> int:
        return len(self.entries)


def build_index(entries: list[DocEntry]) -> DocIndex:
    """Build the lookup index; later duplicates overwrite earlier ones."""
    index = DocIndex()
    for entry in entries:
        index.add(entry)
    return index


def class_hierarchy(entries: list[DocEntry]) -> tuple[set[tuple[tuple[str, ...], tuple[str, ...]]], int]:
    """(subclass path, base path) pairs for resolvable bases, plus the count
    of bases that could not be resolved."""
    pairs: set[tuple[tuple[str, ...], tuple[str, ...]]] = set()
    unresolved = 0
    for entry in entries:
        if entry.kind != "class":
            continue
        for base in entry.bases:
            pairs.add((entry.qualified_name, base))
        unresolved += len(entry.unresolved_bases)
    return pairs, unresolved


# ---------------------------------------------------------------------------
# Persistence: one DocEntry per line, sorted by qualified name.


def entry_to_record(entry: DocEntry) -> dict:
    return {
        "qualifiedName": list(entry.qualified_name),
        "kind": entry.kind,
        "docstring": entry.docstring,
        "params": [
            {"name": p.name, "hasDefault": p.has_default, "annotation": p.annotation}
            for p in entry.params
        ],
        "returns": entry.returns,
        "bases": [list(b) for b in entry.bases],
        "unresolvedBases": list(entry.unresolved_bases),
    }


def entry_from_record(rec: dict) -> DocEntry:
    return DocEntry(
        qualified_name=tuple(rec["qualifiedName"]),
        kind=rec["kind"],
        docstring=rec.get("docstring", ""),
        params=tuple(
            ParamSpec(p["name"], p.get("hasDefault", False), p.get("annotation"))
            for p in rec.get("params", [])
        ),
        returns=rec.get("returns"),
        bases=tuple(tuple(b) for b in rec.get("bases", [])),
        unresolved_bases=tuple(rec.get("unresolvedBases", [])),
    )


def save_entries(entries: list[DocEntry], path: str) -> None:
    ordered = sorted(entries, key=lambda e: e.rendered_name())
    with open(path, "w", encoding="utf-8") as fh:
        for entry in ordered:
            fh.write(json.dumps(entry_to_record(entry), ensure_ascii=False) + "\n")


def load_entries(path: str) -> list[DocEntry]:
    entries = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                entries.append(entry_from_record(json.loads(line)))
    return entries
