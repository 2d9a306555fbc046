"""Source frontend: parsing, content hashing, import resolution.

Turns raw bytes (.py files or .ipynb notebooks) into a normalized syntax
tree with 1-based source locations, deduplicates corpora by content digest,
and resolves import statements into qualified-name bindings.
"""

from __future__ import annotations

import ast
import hashlib
import json
import re
from dataclasses import dataclass, field


class SourceSyntaxError(Exception):
    """Input could not be parsed under the Python 3 grammar.

    ``code`` distinguishes failure classes: "syntax" for plain syntax errors,
    "python2" when the source looks like Python 2-only code, "nul" for
    embedded NUL bytes, "too-deep" for inputs exceeding the parser's
    recursion limit.
    """

    def __init__(self, message: str, line: int = 1, col: int = 1, code: str = "syntax"):
        super().__init__(f"{message} (line {line}, col {col})")
        self.message = message
        self.line = line
        self.col = col
        self.code = code


class EncodingError(Exception):
    """Input bytes do not decode as UTF-8."""


class NotebookFormatError(Exception):
    """Input claims to be a notebook but is not valid notebook JSON."""


@dataclass(frozen=True)
class SourceFile:
    """One corpus file: raw content plus its MD5 digest (32 lowercase hex)."""

    path: str
    content: bytes
    digest: str

    @classmethod
    def from_bytes(cls, path: str, content: bytes) -> "SourceFile":
        return cls(path=path, content=content, digest=hashlib.md5(content).hexdigest())


@dataclass(frozen=True, order=True)
class SourceLocation:
    """1-based, inclusive source span."""

    file: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int


# ast node class -> normalized kind
_KIND_MAP: dict[type, str] = {
    ast.Call: "call",
    ast.Attribute: "attribute",
    ast.Subscript: "subscript",
    ast.Assign: "assign",
    ast.AugAssign: "assign",
    ast.AnnAssign: "assign",
    ast.FunctionDef: "function-def",
    ast.AsyncFunctionDef: "function-def",
    ast.ClassDef: "class-def",
    ast.Import: "import",
    ast.ImportFrom: "import",
    ast.Return: "return",
    ast.Constant: "literal",
    ast.Name: "name",
    ast.If: "branch",
    ast.IfExp: "branch",
    ast.Try: "branch",
    ast.For: "loop",
    ast.AsyncFor: "loop",
    ast.While: "loop",
}
if hasattr(ast, "Match"):
    _KIND_MAP[ast.Match] = "branch"
if hasattr(ast, "TryStar"):
    _KIND_MAP[ast.TryStar] = "branch"


@dataclass(frozen=True)
class SyntaxNode:
    """Normalized view of one syntax element.

    Locations are widened to contain all children, so the containment
    invariant holds even where CPython's own spans do not (decorators).
    """

    kind: str
    location: SourceLocation
    children: tuple["SyntaxNode", ...]


@dataclass
class SyntaxTree:
    """Full-fidelity parse result.

    ``module`` is the raw ``ast.Module`` consumed by the dataflow
    interpreter; ``root``/``nodes`` are the normalized projection used by
    coverage accounting and tests, built lazily on first access.
    """

    file: str
    source: str
    module: ast.Module
    _root: SyntaxNode | None = field(default=None, repr=False)

    @property
    def root(self) -> SyntaxNode:
        if self._root is None:
            normalized, span = _normalize(self.module, self.file)
            if span is None:
                span = SourceLocation(self.file, 1, 1, 1, 1)
            self._root = SyntaxNode(kind="module", location=span, children=tuple(normalized))
        return self._root

    @property
    def nodes(self) -> list[SyntaxNode]:
        out: list[SyntaxNode] = []
        stack = [self.root]
        while stack:
            n = stack.pop()
            out.append(n)
            stack.extend(reversed(n.children))
        return out

    def call_locations(self) -> list[SourceLocation]:
        """Locations of every call expression, in source order."""
        locs = [n.location for n in self.nodes if n.kind == "call"]
        return sorted(locs)


def location_of(node: ast.AST, file: str) -> SourceLocation:
    """Source span of an ast node, converted to 1-based inclusive columns."""
    line = getattr(node, "lineno", 1)
    col = getattr(node, "col_offset", 0) + 1
    end_line = getattr(node, "end_lineno", None) or line
    end_col = getattr(node, "end_col_offset", None)
    end_col = col if end_col is None else max(end_col, col)
    return SourceLocation(file, line, col, end_line, end_col)


def _normalize(root: ast.AST, file: str) -> tuple[list[SyntaxNode], SourceLocation | None]:
    """Normalized projection of an ast subtree, plus its widened span.

    Post-order over an explicit stack, so arbitrarily deep input cannot
    overflow the interpreter stack once it made it through the parser.
    """
    results: dict[int, tuple[list[SyntaxNode], SourceLocation | None]] = {}
    stack: list[tuple[ast.AST, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if not expanded:
            stack.append((node, True))
            for child in reversed(list(ast.iter_child_nodes(node))):
                stack.append((child, False))
            continue
        children: list[SyntaxNode] = []
        span = location_of(node, file) if hasattr(node, "lineno") else None
        for child in ast.iter_child_nodes(node):
            sub, sub_span = results.pop(id(child))
            children.extend(sub)
            if sub_span is not None:
                span = sub_span if span is None else _widen(span, sub_span)
        kind = _KIND_MAP.get(type(node))
        if kind is None or span is None:
            results[id(node)] = (children, span)
        else:
            results[id(node)] = (
                [SyntaxNode(kind=kind, location=span, children=tuple(children))],
                span,
            )
    return results[id(root)]


def _widen(a: SourceLocation, b: SourceLocation) -> SourceLocation:
    start = min((a.start_line, a.start_col), (b.start_line, b.start_col))
    end = max((a.end_line, a.end_col), (b.end_line, b.end_col))
    return SourceLocation(a.file, start[0], start[1], end[0], end[1])


_PY2_HINTS = (
    re.compile(r"^\s*print\s+[^\s(=]", re.MULTILINE),
    re.compile(r"^\s*except\s+[\w.]+\s*,\s*\w+\s*:", re.MULTILINE),
    re.compile(r"^\s*exec\s+[^(]", re.MULTILINE),
)


def _looks_like_python2(source: str) -> bool:
    return any(p.search(source) for p in _PY2_HINTS)


def parse_source(file: SourceFile) -> SyntaxTree:
    """Parse a source file into a SyntaxTree.

    Raises SourceSyntaxError on unparseable input (never a partial tree)
    and EncodingError when the bytes are not UTF-8. Notebook files are
    expected to have been converted by ``notebook_to_source`` already.
    """
    try:
        source = file.content.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise EncodingError(f"{file.path}: not valid UTF-8 ({exc.reason})") from exc

    try:
        module = ast.parse(source, filename=file.path)
    except SyntaxError as exc:
        code = "python2" if _looks_like_python2(source) else "syntax"
        raise SourceSyntaxError(
            exc.msg or "invalid syntax", exc.lineno or 1, (exc.offset or 0) + 1, code=code
        ) from exc
    except ValueError as exc:
        raise SourceSyntaxError(str(exc), code="nul") from exc
    except RecursionError as exc:
        raise SourceSyntaxError("nesting too deep to parse", code="too-deep") from exc
    return SyntaxTree(file=file.path, source=source, module=module)


def dedupe(files: list[SourceFile]) -> list[SourceFile]:
    """Drop content duplicates, keeping the first occurrence per digest."""
    seen: set[str] = set()
    out: list[SourceFile] = []
    for f in files:
        if f.digest not in seen:
            seen.add(f.digest)
            out.append(f)
    return out


@dataclass(frozen=True)
class ImportBinding:
    """One imported local name and the qualified path it denotes.

    ``import a.b as c``      -> (c, (a, b))
    ``import a.b``           -> (a, (a,))
    ``from a.b import c``    -> (c, (a, b, c))
    ``from a.b import *``    -> ("*", (a, b)), wildcard=True
    """

    local_name: str
    qualified_path: tuple[str, ...]
    wildcard: bool = False
    location: SourceLocation | None = field(default=None, compare=False)


def collect_imports(tree: SyntaxTree) -> list[ImportBinding]:
    """All import bindings in the file, in source order (nested defs included)."""
    bindings: list[ImportBinding] = []
    for node in ast.walk(tree.module):
        if isinstance(node, ast.Import):
            for alias in node.names:
                parts = tuple(alias.name.split("."))
                if alias.asname:
                    bindings.append(
                        ImportBinding(alias.asname, parts, location=location_of(node, tree.file))
                    )
                else:
                    bindings.append(
                        ImportBinding(parts[0], (parts[0],), location=location_of(node, tree.file))
                    )
        elif isinstance(node, ast.ImportFrom):
            if node.module is None or node.level:
                # Relative imports have no absolute qualified path; treat as
                # unresolvable, same as star imports.
                base: tuple[str, ...] = tuple((node.module or "").split(".")) if node.module else ()
                for alias in node.names:
                    bindings.append(
                        ImportBinding(
                            alias.asname or alias.name,
                            base + (alias.name,) if base else (alias.name,),
                            wildcard=True,
                            location=location_of(node, tree.file),
                        )
                    )
                continue
            base = tuple(node.module.split("."))
            for alias in node.names:
                if alias.name == "*":
                    bindings.append(
                        ImportBinding("*", base, wildcard=True, location=location_of(node, tree.file))
                    )
                else:
                    bindings.append(
                        ImportBinding(
                            alias.asname or alias.name,
                            base + (alias.name,),
                            location=location_of(node, tree.file),
                        )
                    )
    bindings.sort(
        key=lambda b: (b.location.start_line, b.location.start_col) if b.location else (0, 0)
    )
    return bindings


_MAGIC_LINE = re.compile(r"^\s*[%!]")


def notebook_to_source(path: str, content: bytes) -> bytes:
    """Concatenate a notebook's code cells into one Python source blob.

    Cell boundaries become comments so locations in the concatenated form
    stay navigable; IPython magics and shell escapes are commented out.
    """
    try:
        doc = json.loads(content.decode("utf-8-sig"))
        cells = doc["cells"]
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise NotebookFormatError(f"{path}: not a v4 notebook") from exc

    lines: list[str] = []
    for i, cell in enumerate(cells):
        if not isinstance(cell, dict) or cell.get("cell_type") != "code":
            continue
        src = cell.get("source", "")
        if isinstance(src, list):
            src = "".join(src)
        lines.append(f"# --- cell {i} ---")
        for line in src.splitlines():
            lines.append("#" + line if _MAGIC_LINE.match(line) else line)
    return ("\n".join(lines) + "\n").encode("utf-8")


def load_source_file(path: str, content: bytes) -> SourceFile:
    """Build a SourceFile, converting notebooks to concatenated code first.

    The digest is taken over the bytes handed to the parser, so two
    notebooks with identical code but different outputs deduplicate.
    """
    if path.endswith(".ipynb"):
        content = notebook_to_source(path, content)
    return SourceFile.from_bytes(path, content)
