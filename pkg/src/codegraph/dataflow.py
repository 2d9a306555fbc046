"""Abstract interpreter producing per-program dataflow/control-flow graphs.

Library calls are not analyzed into; instead every API is modeled by three
abstraction rules:

  (a) a call to an imported function returns a fresh abstract object
      ("turtle") with no side effects;
  (b) reading a field of such an object yields the object itself, with the
      field appended to its access path;
  (c) calls and reads on those results behave exactly like calls and reads
      on the imported API itself.

The interpreter executes every entry point (module body plus each defined
function) over these rules, emitting call/read/write nodes, flowsTo edges
with argument ordinals, and immediatelyPrecedes edges from a statement-level
control-flow walk. The abstraction is deliberately neither sound nor
complete; it is built to scale and to label nodes with useful access paths.
"""

from __future__ import annotations

import ast
import time
from dataclasses import dataclass, field

from .frontend import ImportBinding, SourceLocation, SyntaxTree, location_of
from .graphmodel import (
    ConstantLiteral,
    GraphEdge,
    GraphNode,
    ProgramGraph,
    cap_path,
    make_node_id,
)

MERGE_CAP = 8  # branch-merge set bound; beyond it a value decays to Unknown


class AnalysisTimeout(Exception):
    """Wall-clock analysis budget exceeded; partial graph is discarded."""

    def __init__(self, budget: float):
        super().__init__(f"analysis exceeded budget of {budget:.3g}s")
        self.budget = budget


# ---------------------------------------------------------------------------
# Abstract values


class _Unknown:
    _instance: "_Unknown | None" = None

    def __new__(cls) -> "_Unknown":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "Unknown"


UNKNOWN = _Unknown()


@dataclass(frozen=True)
class Turtle:
    """An abstract API object: origin node plus accumulated access path.

    ``pending`` holds field reads that have not yet materialized a node
    (rule (b) in call-target position appends here).
    """

    origin: str
    path: tuple[str, ...]
    pending: tuple[str, ...] = ()

    @property
    def effective(self) -> tuple[str, ...]:
        return cap_path(self.path + self.pending)


@dataclass(frozen=True)
class Const:
    value: object
    datatype: str


@dataclass(frozen=True)
class TupleVal:
    items: tuple[object, ...]


@dataclass(frozen=True)
class FuncRef:
    """Reference to a function defined in the analyzed file.

    Equality includes the def node (by identity) so same-named nested
    functions stay distinct; hashing uses the name only.
    """

    qualname: str
    node: ast.AST = field(hash=False)


@dataclass(frozen=True)
class ClassRef:
    """Reference to a class defined in the analyzed file."""

    qualname: str
    node: ast.AST = field(hash=False)


@dataclass(frozen=True)
class BoundMethod:
    func: FuncRef
    receiver: object


@dataclass(frozen=True)
class Multi:
    """Bounded may-set of alternatives from branch merging."""

    members: tuple[object, ...]


AbstractValue = object  # Turtle | Const | TupleVal | FuncRef | ClassRef | BoundMethod | Multi | UNKNOWN


def merge_values(a: AbstractValue, b: AbstractValue) -> AbstractValue:
    """Join two branch results. Unknown is absorbed when anything concrete
    survives (may-analysis); sets beyond MERGE_CAP decay to Unknown."""
    out: list[AbstractValue] = []
    for v in _alternatives(a) + _alternatives(b):
        if v is UNKNOWN:
            continue
        if v not in out:
            out.append(v)
    if not out:
        return UNKNOWN
    if len(out) == 1:
        return out[0]
    if len(out) > MERGE_CAP:
        return UNKNOWN
    return Multi(tuple(out))


def _alternatives(v: AbstractValue) -> tuple:
    return v.members if isinstance(v, Multi) else (v,)


def _turtles(v: AbstractValue) -> list[Turtle]:
    return [m for m in _alternatives(v) if isinstance(m, Turtle)]


def _as_const(v: AbstractValue) -> Const | None:
    return v if isinstance(v, Const) else None


# ---------------------------------------------------------------------------
# Environments and entry points


class Environment:
    """Stack of name frames; innermost-first lookup."""

    def __init__(self, frames: list[dict[str, AbstractValue]] | None = None):
        self.frames: list[dict[str, AbstractValue]] = frames if frames is not None else [{}]

    def lookup(self, name: str) -> AbstractValue:
        for frame in reversed(self.frames):
            if name in frame:
                return frame[name]
        return UNKNOWN

    def bind(self, name: str, value: AbstractValue) -> None:
        self.frames[-1][name] = value

    def fork(self) -> "Environment":
        return Environment([dict(f) for f in self.frames])

    def restore_from(self, other: "Environment") -> None:
        self.frames = other.frames


def merge_envs(a: Environment, b: Environment) -> Environment:
    """Pointwise join of two same-depth forks of one environment."""
    frames = []
    for fa, fb in zip(a.frames, b.frames):
        merged = dict(fa)
        for k, v in fb.items():
            merged[k] = merge_values(fa[k], v) if k in fa else v
        frames.append(merged)
    return Environment(frames)


@dataclass(frozen=True)
class EntryPoint:
    """A unit of analysis: the module body ("main") or one defined function."""

    qualified_name: str
    params: tuple[str, ...]
    node: ast.AST = field(compare=False, hash=False)


def _param_names(node: ast.FunctionDef | ast.AsyncFunctionDef) -> tuple[str, ...]:
    a = node.args
    names = [p.arg for p in a.posonlyargs] + [p.arg for p in a.args]
    if a.vararg:
        names.append(a.vararg.arg)
    names += [p.arg for p in a.kwonlyargs]
    if a.kwarg:
        names.append(a.kwarg.arg)
    return tuple(names)


def enumerate_entrypoints(tree: SyntaxTree) -> list[EntryPoint]:
    """Module body first, then every defined function/method in source order."""
    entry_points = [EntryPoint("main", (), tree.module)]

    def walk(body: list[ast.stmt], prefix: str) -> None:
        for stmt in body:
            if isinstance(stmt, (ast.FunctionDef, ast.AsyncFunctionDef)):
                qual = prefix + stmt.name
                entry_points.append(EntryPoint(qual, _param_names(stmt), stmt))
                walk(stmt.body, qual + ".")
            elif isinstance(stmt, ast.ClassDef):
                walk(stmt.body, prefix + stmt.name + ".")

    walk(tree.module.body, "")
    return entry_points


# ---------------------------------------------------------------------------
# Interpreter


@dataclass
class _LoopWatch:
    # Marker token rides the frontier until the first body call replaces it,
    # which is how the body's entry calls (back-edge targets) are detected.
    marker: str
    entry_calls: set[str] = field(default_factory=set)
    break_frontiers: set[str] = field(default_factory=set)
    continue_frontiers: set[str] = field(default_factory=set)


@dataclass
class _InlineWatch:
    # Same marker trick, recording the control-flow summary of one inline:
    # which calls can run first, and which calls its frontier ends on.
    marker: str
    serial: int
    entry_calls: set[str] = field(default_factory=set)
    touched_calls: set[str] = field(default_factory=set)


_MARKER_PREFIX = "\x00mark:"


def _marker_serial_of(token: str) -> int:
    return int(token[len(_MARKER_PREFIX):])


@dataclass
class _ClassInfo:
    qualname: str
    node: ast.ClassDef
    methods: dict[str, ast.AST]


_TICK_MASK = 0xFF


class Interpreter:
    """Single-program analysis; builds one ProgramGraph, then seals it."""

    def __init__(
        self,
        tree: SyntaxTree,
        imports: list[ImportBinding],
        digest: str,
        budget_seconds: float | None = None,
        inline_cache: bool = True,
    ):
        self.tree = tree
        self.imports = imports
        self.digest = digest
        self.graph = ProgramGraph(digest)
        self.budget = budget_seconds
        self.deadline = None if budget_seconds is None else time.monotonic() + budget_seconds
        self._cache_enabled = inline_cache
        self._ticks = 0

        self.base_frame: dict[str, AbstractValue] = {}
        self.classes: dict[str, _ClassInfo] = {}
        self.import_node_by_path: dict[tuple[str, ...], str] = {}

        self._ep_key = "main"
        self._counters: dict[str, int] = {}
        self._memo: dict[tuple, str] = {}
        self.frontier: set[str] = set()
        self._inline_stack: list[ast.AST] = []
        self._return_stack: list[list] = []
        self._loop_stack: list[_LoopWatch] = []
        self._inline_watches: list[_InlineWatch] = []
        self._inline_cache: dict[tuple, tuple] = {}
        self._marker_serial = 0

    # -- plumbing ----------------------------------------------------------

    def _tick(self) -> None:
        self._ticks += 1
        if self.deadline is not None and (self._ticks & _TICK_MASK) == 0:
            if time.monotonic() > self.deadline:
                raise AnalysisTimeout(self.budget or 0.0)

    def _next_id(self, kind: str) -> str:
        idx = self._counters.get(self._ep_key, 0)
        self._counters[self._ep_key] = idx + 1
        return make_node_id(self.digest, self._ep_key, idx, kind)

    def _new_node(self, kind: str, **fields) -> GraphNode:
        return self.graph.add_node(GraphNode(id=self._next_id(kind), kind=kind, **fields))

    def _memo_node(self, role: str, site: ast.AST | None, kind: str, **fields) -> tuple[GraphNode, bool]:
        """One node per (entry point, role, syntactic site); reused on re-evaluation."""
        if site is None:
            return self._new_node(kind, **fields), True
        key = (self._ep_key, role, id(site))
        node_id = self._memo.get(key)
        if node_id is not None:
            return self.graph.nodes[node_id], False
        node = self._new_node(kind, **fields)
        self._memo[key] = node.id
        return node, True

    def _edge(self, src: str, dst: str, kind: str, ordinal: int | str | None = None) -> None:
        self.graph.merge_edge(GraphEdge(src=src, dst=dst, kind=kind, ordinal=ordinal))

    def _advance_frontier(self, call_id: str) -> None:
        """Emit immediatelyPrecedes from the current frontier, then move it."""
        for src in sorted(self.frontier):
            if src != call_id and src in self.graph.nodes:
                self._edge(src, call_id, "immediatelyPrecedes")
        for watch in self._loop_stack:
            if watch.marker in self.frontier:
                watch.entry_calls.add(call_id)
        for inline_watch in self._inline_watches:
            inline_watch.touched_calls.add(call_id)
            if inline_watch.marker in self.frontier:
                inline_watch.entry_calls.add(call_id)
        self.frontier = {call_id}

    def _loc(self, node: ast.AST) -> SourceLocation:
        return location_of(node, self.tree.file)

    # -- program setup -----------------------------------------------------

    def _setup(self) -> None:
        # Import nodes are shared by all entry points and created up front,
        # so a function body can reference a module-level import's node.
        for binding in self.imports:
            if binding.wildcard:
                continue
            path = cap_path(binding.qualified_path)
            node_id = self.import_node_by_path.get(path)
            if node_id is None:
                node = self._new_node(
                    "import", label=path, location=binding.location,
                    value_names={binding.local_name},
                )
                self.import_node_by_path[path] = node.id
            else:
                self.graph.nodes[node_id].value_names.add(binding.local_name)
            self.base_frame[binding.local_name] = Turtle(
                origin=self.import_node_by_path[path], path=path
            )
        self._register_defs(self.tree.module.body, "")

    def _register_defs(self, body: list[ast.stmt], prefix: str) -> None:
        # Only module-level names enter the shared base frame; nested defs
        # and classes are still registered so constructors and methods
        # resolve wherever they are defined.
        for stmt in body:
            if isinstance(stmt, (ast.FunctionDef, ast.AsyncFunctionDef)):
                if prefix == "" and not stmt.decorator_list:
                    self.base_frame[stmt.name] = FuncRef(stmt.name, stmt)
                self._register_defs(stmt.body, prefix + stmt.name + ".")
            elif isinstance(stmt, ast.ClassDef):
                qual = prefix + stmt.name
                methods = {
                    s.name: s
                    for s in stmt.body
                    if isinstance(s, (ast.FunctionDef, ast.AsyncFunctionDef))
                    and not s.decorator_list
                }
                self.classes[qual] = _ClassInfo(qual, stmt, methods)
                if prefix == "" and not stmt.decorator_list:
                    self.base_frame[qual] = ClassRef(qual, stmt)
                self._register_defs(stmt.body, qual + ".")

    # -- entry points ------------------------------------------------------

    def run(self) -> ProgramGraph:
        self._setup()
        seen_keys: dict[str, int] = {}
        for ep in enumerate_entrypoints(self.tree):
            # The module body is named "main"; a user function may share that
            # name, so the id keyspace disambiguates with a suffix. The main
            # instruction counter continues past the shared import nodes.
            n = seen_keys.get(ep.qualified_name, 0)
            seen_keys[ep.qualified_name] = n + 1
            self._ep_key = ep.qualified_name if n == 0 else f"{ep.qualified_name}#{n + 1}"
            self.frontier = set()
            self._run_entrypoint(ep)
        self.graph.seal()
        return self.graph

    def _run_entrypoint(self, ep: EntryPoint) -> None:
        if isinstance(ep.node, ast.Module):
            env = Environment([dict(self.base_frame)])
            self._exec_block(ep.node.body, env)
            return
        locals_frame: dict[str, AbstractValue] = {}
        qual_parts = tuple(ep.qualified_name.split("."))
        for param in ep.params:
            node = self._new_node(
                "synthetic-param", label=cap_path(qual_parts + (param,)),
                value_names={param},
            )
            locals_frame[param] = Turtle(origin=node.id, path=cap_path(qual_parts + (param,)))
        env = Environment([self.base_frame, locals_frame])
        self._return_stack.append([])
        self._exec_block(ep.node.body, env)  # type: ignore[attr-defined]
        self._return_stack.pop()

    # -- statements ---------------------------------------------------------

    def _exec_block(self, stmts: list[ast.stmt], env: Environment) -> None:
        for stmt in stmts:
            self._tick()
            self._exec_stmt(stmt, env)

    def _exec_stmt(self, stmt: ast.stmt, env: Environment) -> None:
        if isinstance(stmt, ast.Assign):
            value = self.eval_expr(stmt.value, env)
            for target in stmt.targets:
                self._assign_target(target, value, env)
        elif isinstance(stmt, ast.AnnAssign):
            if stmt.value is not None:
                self._assign_target(stmt.target, self.eval_expr(stmt.value, env), env)
        elif isinstance(stmt, ast.AugAssign):
            self.eval_expr(stmt.value, env)
            if isinstance(stmt.target, ast.Name):
                env.bind(stmt.target.id, UNKNOWN)
            elif isinstance(stmt.target, ast.Attribute):
                base = self.eval_expr(stmt.target.value, env)
                self.eval_attribute_write(base, stmt.target.attr, UNKNOWN, site=stmt.target)
        elif isinstance(stmt, ast.Expr):
            self.eval_expr(stmt.value, env)
        elif isinstance(stmt, (ast.Import, ast.ImportFrom)):
            self._exec_import(stmt, env)
        elif isinstance(stmt, (ast.FunctionDef, ast.AsyncFunctionDef)):
            self._exec_funcdef(stmt, env)
        elif isinstance(stmt, ast.ClassDef):
            self._exec_classdef(stmt, env)
        elif isinstance(stmt, ast.Return):
            value = UNKNOWN if stmt.value is None else self.eval_expr(stmt.value, env)
            if self._return_stack:
                self._return_stack[-1].append((value, frozenset(self.frontier)))
            self.frontier = set()
        elif isinstance(stmt, ast.If):
            self._exec_if(stmt, env)
        elif isinstance(stmt, (ast.While, ast.For, ast.AsyncFor)):
            self._exec_loop(stmt, env)
        elif isinstance(stmt, ast.Try) or (hasattr(ast, "TryStar") and isinstance(stmt, ast.TryStar)):
            self._exec_try(stmt, env)
        elif isinstance(stmt, (ast.With, ast.AsyncWith)):
            for item in stmt.items:
                ctx = self.eval_expr(item.context_expr, env)
                if item.optional_vars is not None:
                    self._assign_target(item.optional_vars, ctx, env)
            self._exec_block(stmt.body, env)
        elif isinstance(stmt, ast.Raise):
            if stmt.exc is not None:
                self.eval_expr(stmt.exc, env)
            self.frontier = set()
        elif isinstance(stmt, ast.Assert):
            self.eval_expr(stmt.test, env)
            if stmt.msg is not None:
                self.eval_expr(stmt.msg, env)
        elif isinstance(stmt, ast.Delete):
            for target in stmt.targets:
                if isinstance(target, ast.Name):
                    env.bind(target.id, UNKNOWN)
        elif isinstance(stmt, ast.Break):
            if self._loop_stack:
                self._loop_stack[-1].break_frontiers |= self.frontier
            self.frontier = set()
        elif isinstance(stmt, ast.Continue):
            if self._loop_stack:
                self._loop_stack[-1].continue_frontiers |= self.frontier
            self.frontier = set()
        elif hasattr(ast, "Match") and isinstance(stmt, ast.Match):
            self._exec_match(stmt, env)
        else:
            # Global/Nonlocal/Pass and anything exotic: no dataflow effect.
            pass

    def _exec_import(self, stmt: ast.stmt, env: Environment) -> None:
        for alias in stmt.names:  # type: ignore[attr-defined]
            if alias.name == "*":
                continue
            if isinstance(stmt, ast.Import):
                parts = tuple(alias.name.split("."))
                local, path = (alias.asname, parts) if alias.asname else (parts[0], (parts[0],))
            else:
                if stmt.module is None or stmt.level:  # type: ignore[attr-defined]
                    continue
                path = tuple(stmt.module.split(".")) + (alias.name,)  # type: ignore[attr-defined]
                local = alias.asname or alias.name
            node_id = self.import_node_by_path.get(cap_path(path))
            if node_id is not None:
                env.bind(local, Turtle(origin=node_id, path=cap_path(path)))

    def _exec_funcdef(self, stmt: ast.FunctionDef | ast.AsyncFunctionDef, env: Environment) -> None:
        for dec in stmt.decorator_list:
            self._eval_decorator(dec, env)
        # A decorator's result is opaque, so the decorated name is Unknown;
        # the function still gets analyzed as its own entry point.
        if stmt.decorator_list:
            env.bind(stmt.name, UNKNOWN)
        else:
            env.bind(stmt.name, FuncRef(stmt.name, stmt))

    def _exec_classdef(self, stmt: ast.ClassDef, env: Environment) -> None:
        for dec in stmt.decorator_list:
            self._eval_decorator(dec, env)
        for base in stmt.bases:
            self.eval_expr(base, env)
        # Class bodies execute at definition time; interpret them in a
        # throwaway frame so their calls are captured in this entry point.
        env.frames.append({})
        self._exec_block(stmt.body, env)
        env.frames.pop()
        info = self._class_info_for(stmt)
        if stmt.decorator_list or info is None:
            env.bind(stmt.name, UNKNOWN)
        else:
            env.bind(stmt.name, ClassRef(info.qualname, stmt))

    def _class_info_for(self, node: ast.ClassDef) -> _ClassInfo | None:
        for info in self.classes.values():
            if info.node is node:
                return info
        return None

    def _eval_decorator(self, dec: ast.expr, env: Environment) -> None:
        if isinstance(dec, ast.Call):
            self.eval_expr(dec, env)
        else:
            value = self.eval_expr(dec, env)
            if _turtles(value):
                self.eval_call(env, value, [], {}, self._loc(dec), site=dec)

    def _exec_if(self, stmt: ast.If, env: Environment) -> None:
        self.eval_expr(stmt.test, env)
        fork_frontier = set(self.frontier)
        then_env = env.fork()
        self._exec_block(stmt.body, then_env)
        then_frontier = self.frontier
        self.frontier = fork_frontier
        else_env = env.fork()
        self._exec_block(stmt.orelse, else_env)
        self.frontier = then_frontier | self.frontier
        env.restore_from(merge_envs(then_env, else_env))

    def _exec_loop(self, stmt: ast.While | ast.For | ast.AsyncFor, env: Environment) -> None:
        if isinstance(stmt, ast.While):
            self.eval_expr(stmt.test, env)
        else:
            self.eval_expr(stmt.iter, env)
        header_frontier = set(self.frontier)
        self._marker_serial += 1
        watch = _LoopWatch(marker=f"{_MARKER_PREFIX}{self._marker_serial}")
        self._loop_stack.append(watch)
        self.frontier = header_frontier | {watch.marker}
        body_env = env.fork()
        if isinstance(stmt, (ast.For, ast.AsyncFor)):
            self._bind_all_unknown(stmt.target, body_env)
        # Single pass over the body; turtle paths stay bounded because call
        # nodes are memoized per instruction.
        self._exec_block(stmt.body, body_env)
        self._loop_stack.pop()
        back_sources = self.frontier | watch.continue_frontiers
        for src in sorted(back_sources):
            for dst in sorted(watch.entry_calls):
                if src != dst and src in self.graph.nodes:
                    self._edge(src, dst, "immediatelyPrecedes")
        # Loop may run zero times: the header frontier survives.
        self.frontier = header_frontier | self.frontier | watch.break_frontiers
        self.frontier.discard(watch.marker)
        env.restore_from(merge_envs(env, body_env))
        if stmt.orelse:
            self._exec_block(stmt.orelse, env)

    def _exec_try(self, stmt, env: Environment) -> None:
        pre_env = env.fork()
        pre_frontier = set(self.frontier)
        self._exec_block(stmt.body, env)
        if stmt.orelse:
            self._exec_block(stmt.orelse, env)
        body_frontier = self.frontier
        merged_env = env
        for handler in stmt.handlers:
            self.frontier = set(pre_frontier)
            handler_env = pre_env.fork()
            if handler.type is not None:
                self.eval_expr(handler.type, handler_env)
            if handler.name:
                handler_env.bind(handler.name, UNKNOWN)
            self._exec_block(handler.body, handler_env)
            body_frontier |= self.frontier
            merged_env = merge_envs(merged_env, handler_env)
        self.frontier = body_frontier
        env.restore_from(merged_env)
        if stmt.finalbody:
            self._exec_block(stmt.finalbody, env)

    def _exec_match(self, stmt, env: Environment) -> None:
        self.eval_expr(stmt.subject, env)
        fork_frontier = set(self.frontier)
        out_frontier: set[str] = set()
        merged: Environment | None = None
        for case in stmt.cases:
            self.frontier = set(fork_frontier)
            case_env = env.fork()
            for name in _capture_names(case.pattern):
                case_env.bind(name, UNKNOWN)
            if case.guard is not None:
                self.eval_expr(case.guard, case_env)
            self._exec_block(case.body, case_env)
            out_frontier |= self.frontier
            merged = case_env if merged is None else merge_envs(merged, case_env)
        # No case may match; fall through.
        self.frontier = out_frontier | fork_frontier
        if merged is not None:
            env.restore_from(merge_envs(env, merged))

    def _bind_all_unknown(self, target: ast.expr, env: Environment) -> None:
        for node in ast.walk(target):
            if isinstance(node, ast.Name):
                env.bind(node.id, UNKNOWN)

    # -- assignment targets --------------------------------------------------

    def _assign_target(self, target: ast.expr, value: AbstractValue, env: Environment) -> None:
        if isinstance(target, ast.Name):
            env.bind(target.id, value)
            for t in _turtles(value):
                self.graph.nodes[t.origin].value_names.add(target.id)
        elif isinstance(target, (ast.Tuple, ast.List)):
            if any(isinstance(e, ast.Starred) for e in target.elts):
                for elt in target.elts:
                    self._bind_all_unknown(elt, env)
                return
            n = len(target.elts)
            if n < 2:
                for elt in target.elts:
                    self._assign_target(elt, UNKNOWN, env)
                return
            locs = [self._loc(e) for e in target.elts]
            parts = self.eval_tuple_unpack(n, value, site=target, element_locations=locs)
            for elt, part in zip(target.elts, parts):
                self._assign_target(elt, part, env)
        elif isinstance(target, ast.Attribute):
            base = self.eval_expr(target.value, env)
            self.eval_attribute_write(base, target.attr, value, site=target)
        elif isinstance(target, ast.Subscript):
            # Container-element writes are not modeled; only evaluate for effects.
            self.eval_expr(target.value, env)
            self.eval_expr(target.slice, env)
        elif isinstance(target, ast.Starred):
            self._assign_target(target.value, UNKNOWN, env)

    # -- expressions ----------------------------------------------------------

    def eval_expr(self, node: ast.expr, env: Environment) -> AbstractValue:
        self._tick()
        if isinstance(node, ast.Constant):
            return _constant_value(node.value)
        if isinstance(node, ast.Name):
            return env.lookup(node.id)
        if isinstance(node, ast.Attribute):
            base = self.eval_expr(node.value, env)
            return self.eval_attribute(env, base, node.attr, usage="data", site=node)
        if isinstance(node, ast.Subscript):
            base = self.eval_expr(node.value, env)
            self.eval_expr(node.slice, env)
            return self.eval_subscript(base, site=node)
        if isinstance(node, ast.Call):
            return self._eval_call_expr(node, env)
        if isinstance(node, (ast.Tuple, ast.List)):
            items = tuple(self.eval_expr(e, env) for e in node.elts)
            if isinstance(node.ctx, ast.Load) and len(items) >= 2:
                return TupleVal(items)
            return UNKNOWN
        if isinstance(node, ast.IfExp):
            self.eval_expr(node.test, env)
            return merge_values(self.eval_expr(node.body, env), self.eval_expr(node.orelse, env))
        if isinstance(node, ast.BoolOp):
            merged: AbstractValue = UNKNOWN
            for v in node.values:
                merged = merge_values(merged, self.eval_expr(v, env))
            return merged
        if isinstance(node, (ast.BinOp, ast.Compare, ast.UnaryOp)):
            for child in ast.iter_child_nodes(node):
                if isinstance(child, ast.expr):
                    self.eval_expr(child, env)
            return UNKNOWN
        if isinstance(node, ast.NamedExpr):
            value = self.eval_expr(node.value, env)
            self._assign_target(node.target, value, env)
            return value
        if isinstance(node, ast.Lambda):
            env.frames.append({p: UNKNOWN for p in _param_names(node)})  # type: ignore[arg-type]
            self.eval_expr(node.body, env)
            env.frames.pop()
            return UNKNOWN
        if isinstance(node, (ast.ListComp, ast.SetComp, ast.GeneratorExp, ast.DictComp)):
            return self._eval_comprehension(node, env)
        if isinstance(node, ast.Starred):
            self.eval_expr(node.value, env)
            return UNKNOWN
        if isinstance(node, ast.Await):
            return self.eval_expr(node.value, env)
        if isinstance(node, (ast.Yield, ast.YieldFrom)):
            if node.value is not None:
                self.eval_expr(node.value, env)
            return UNKNOWN
        if isinstance(node, ast.Slice):
            for part in (node.lower, node.upper, node.step):
                if part is not None:
                    self.eval_expr(part, env)
            return UNKNOWN
        # Dict, Set, JoinedStr, FormattedValue, and anything else: evaluate
        # children for their effects, yield Unknown.
        for child in ast.iter_child_nodes(node):
            if isinstance(child, ast.expr):
                self.eval_expr(child, env)
        return UNKNOWN

    def _eval_comprehension(self, node: ast.expr, env: Environment) -> AbstractValue:
        env.frames.append({})
        for gen in node.generators:  # type: ignore[attr-defined]
            self.eval_expr(gen.iter, env)
            self._bind_all_unknown(gen.target, env)
            for cond in gen.ifs:
                self.eval_expr(cond, env)
        if isinstance(node, ast.DictComp):
            self.eval_expr(node.key, env)
            self.eval_expr(node.value, env)
        else:
            self.eval_expr(node.elt, env)  # type: ignore[attr-defined]
        env.frames.pop()
        return UNKNOWN

    def _eval_call_expr(self, node: ast.Call, env: Environment) -> AbstractValue:
        if isinstance(node.func, ast.Attribute):
            base = self.eval_expr(node.func.value, env)
            callee = self.eval_attribute(env, base, node.func.attr, usage="call-target", site=node.func)
        else:
            callee = self.eval_expr(node.func, env)
        args: list[AbstractValue] = []
        arg_locs: list[SourceLocation] = []
        for arg in node.args:
            if isinstance(arg, ast.Starred):
                self.eval_expr(arg.value, env)
                args.append(UNKNOWN)
            else:
                args.append(self.eval_expr(arg, env))
            arg_locs.append(self._loc(arg))
        kwargs: dict[str, AbstractValue] = {}
        kwarg_locs: dict[str, SourceLocation] = {}
        for kw in node.keywords:
            if kw.arg is None:
                self.eval_expr(kw.value, env)
                continue
            kwargs[kw.arg] = self.eval_expr(kw.value, env)
            kwarg_locs[kw.arg] = self._loc(kw.value)
        return self.eval_call(
            env, callee, args, kwargs, self._loc(node),
            site=node, arg_locations=arg_locs, kwarg_locations=kwarg_locs,
        )

    # -- the abstraction rules -------------------------------------------------

    def eval_attribute(
        self,
        env: Environment,
        base: AbstractValue,
        field_name: str,
        usage: str,
        site: ast.AST | None = None,
    ) -> AbstractValue:
        """Rule (b): field reads return the object itself.

        In call-target position the field is only queued on the turtle; in
        data position a read node materializes and becomes the new origin.
        """
        if usage == "call-target":
            if isinstance(base, Turtle):
                resolved = self._resolve_method(base, field_name)
                if resolved is not None:
                    return resolved
                return Turtle(base.origin, base.path, base.pending + (field_name,))
            if isinstance(base, ClassRef):
                info = self.classes.get(base.qualname)
                if info and field_name in info.methods:
                    return FuncRef(f"{base.qualname}.{field_name}", info.methods[field_name])
                return UNKNOWN
            if isinstance(base, Multi):
                out = [
                    Turtle(t.origin, t.path, t.pending + (field_name,)) for t in _turtles(base)
                ]
                if not out:
                    return UNKNOWN
                return out[0] if len(out) == 1 else Multi(tuple(out))
            return UNKNOWN

        turtles = _turtles(base)
        if not turtles:
            return UNKNOWN
        label = cap_path(turtles[0].effective + (field_name,))
        node, _ = self._memo_node(
            "read", site, "read", label=label,
            location=self._loc(site) if site is not None else None,
        )
        for t in turtles:
            self._edge(t.origin, node.id, "flowsTo", ordinal=0)
            self._edge(t.origin, node.id, "reads")
        return Turtle(origin=node.id, path=label)

    def _resolve_method(self, base: Turtle, field_name: str) -> BoundMethod | None:
        """Methods of locally defined classes inline; everything else is API."""
        if base.pending:
            return None
        info = self.classes.get(".".join(base.path))
        if info is None or field_name not in info.methods:
            return None
        return BoundMethod(FuncRef(f"{info.qualname}.{field_name}", info.methods[field_name]), base)

    def eval_subscript(self, base: AbstractValue, site: ast.AST | None = None) -> AbstractValue:
        """Slices keep the access path: a read node with no field appended."""
        turtles = _turtles(base)
        if not turtles:
            return UNKNOWN
        label = turtles[0].effective
        node, _ = self._memo_node(
            "read", site, "read", label=label,
            location=self._loc(site) if site is not None else None,
        )
        for t in turtles:
            self._edge(t.origin, node.id, "flowsTo", ordinal=0)
        return Turtle(origin=node.id, path=label)

    def eval_call(
        self,
        env: Environment,
        callee: AbstractValue,
        args: list[AbstractValue],
        kwargs: dict[str, AbstractValue],
        loc: SourceLocation,
        site: ast.AST | None = None,
        arg_locations: list[SourceLocation] | None = None,
        kwarg_locations: dict[str, SourceLocation] | None = None,
    ) -> AbstractValue:
        """Rule (a)/(c): API calls mint a fresh turtle rooted at a call node.

        User-defined callees are inlined (context-insensitively, recursion
        cut to depth 1); Unknown callees stay Unknown with no node.
        """
        self._tick()
        if isinstance(callee, BoundMethod):
            return self._inline(callee.func, [callee.receiver] + list(args), kwargs)
        if isinstance(callee, FuncRef):
            return self._inline(callee, list(args), kwargs)
        if isinstance(callee, ClassRef):
            return self._construct(callee, args, kwargs, loc, site, arg_locations, kwarg_locations)

        turtles = _turtles(callee)
        if not turtles:
            return UNKNOWN  # unresolvable callee: no node, rule (a) vacuous

        label = turtles[0].effective
        node, _ = self._memo_node("call", site, "call", label=label, location=loc)
        for t in turtles:
            origin_kind = self.graph.nodes[t.origin].kind
            # A plain imported name called directly has no receiver; any
            # pending field chain or derived origin makes the origin flow in.
            if t.pending or origin_kind != "import":
                self._edge(t.origin, node.id, "flowsTo", ordinal=0)
        self._emit_argument_edges(node, args, kwargs, site, arg_locations, kwarg_locations)
        self._advance_frontier(node.id)
        return Turtle(origin=node.id, path=label)

    def _construct(
        self, cls: ClassRef, args, kwargs, loc, site, arg_locations, kwarg_locations
    ) -> AbstractValue:
        label = cap_path(tuple(cls.qualname.split(".")))
        node, _ = self._memo_node("call", site, "call", label=label, location=loc)
        self._emit_argument_edges(node, args, kwargs, site, arg_locations, kwarg_locations)
        self._advance_frontier(node.id)
        instance = Turtle(origin=node.id, path=label)
        info = self.classes.get(cls.qualname)
        if info and "__init__" in info.methods:
            self._inline(
                FuncRef(f"{cls.qualname}.__init__", info.methods["__init__"]),
                [instance] + list(args), kwargs,
            )
        return instance

    def _emit_argument_edges(
        self, node: GraphNode, args, kwargs, site, arg_locations, kwarg_locations
    ) -> None:
        arg_locations = arg_locations or []
        kwarg_locations = kwarg_locations or {}
        for i, value in enumerate(args, start=1):
            self._emit_one_argument(node, value, i, site, arg_locations[i - 1] if i <= len(arg_locations) else node.location)
        for name in kwargs:
            self._emit_one_argument(node, kwargs[name], name, site, kwarg_locations.get(name, node.location))

    def _emit_one_argument(
        self, node: GraphNode, value: AbstractValue, ordinal: int | str,
        site: ast.AST | None, loc: SourceLocation | None,
    ) -> None:
        for member in _alternatives(value):
            if isinstance(member, Turtle):
                self._edge(member.origin, node.id, "flowsTo", ordinal=ordinal)
            elif isinstance(member, TupleVal):
                for item in member.items:
                    for t in _turtles(item):
                        self._edge(t.origin, node.id, "flowsTo", ordinal=ordinal)
            elif isinstance(member, Const):
                cnode, _ = self._memo_node(
                    f"const:{ordinal}:{member.datatype}:{member.value!r}", site, "constant",
                    constant=ConstantLiteral(member.value, member.datatype),
                    location=loc,
                )
                self._edge(node.id, cnode.id, "constantArg", ordinal=ordinal)

    def eval_tuple_unpack(
        self,
        n: int,
        value: AbstractValue,
        site: ast.AST | None = None,
        element_locations: list[SourceLocation] | None = None,
    ) -> list[AbstractValue]:
        """Unpacking a turtle mints one tuple-element node per target."""
        if isinstance(value, TupleVal):
            items = list(value.items[:n])
            items += [UNKNOWN] * (n - len(items))
            return items
        turtles = _turtles(value)
        if not turtles:
            return [UNKNOWN] * n
        label = turtles[0].effective
        out: list[AbstractValue] = []
        for i in range(n):
            loc = element_locations[i] if element_locations else None
            node, _ = self._memo_node(
                f"elem:{i}", site, "tuple-element", label=label, location=loc, element_index=i,
            )
            for t in turtles:
                self._edge(t.origin, node.id, "hasElement")
            out.append(Turtle(origin=node.id, path=label))
        return out

    def eval_attribute_write(
        self, base: AbstractValue, field_name: str, value: AbstractValue,
        site: ast.AST | None = None,
    ) -> None:
        """Attribute stores produce write nodes; value flows in at ordinal 1."""
        turtles = _turtles(base)
        if not turtles:
            return
        label = cap_path(turtles[0].effective + (field_name,))
        node, _ = self._memo_node(
            "write", site, "write", label=label,
            location=self._loc(site) if site is not None else None,
        )
        for t in turtles:
            self._edge(t.origin, node.id, "writes")
        for member in _alternatives(value):
            if isinstance(member, Turtle):
                self._edge(member.origin, node.id, "flowsTo", ordinal=1)
            elif isinstance(member, Const):
                cnode, _ = self._memo_node(
                    f"const:w:{member.datatype}:{member.value!r}", site, "constant",
                    constant=ConstantLiteral(member.value, member.datatype),
                    location=self._loc(site) if site is not None else None,
                )
                self._edge(node.id, cnode.id, "constantArg", ordinal=1)

    # -- user-defined calls -----------------------------------------------------

    def _inline(self, func: FuncRef, args: list[AbstractValue], kwargs: dict[str, AbstractValue]) -> AbstractValue:
        """Walk a user function body in place.

        Analysis is context-insensitive, so inlining the same function with
        the same abstract arguments is a pure recomputation: nodes are
        memoized and all internal edges already exist. Those calls replay a
        cached summary (return value, entry calls, exit frontier) instead of
        re-walking the body, which keeps repeated construction linear.
        """
        node = func.node
        if node in self._inline_stack:
            return UNKNOWN  # re-entrant call: recursion depth capped at 1

        sig: tuple | None = None
        cached = None
        if self._cache_enabled:
            try:
                sig = (self._ep_key, id(node), tuple(args), tuple(sorted(kwargs.items())))
                cached = self._inline_cache.get(sig)
            except TypeError:  # unhashable abstract value; walk without caching
                sig, cached = None, None
        if cached is not None:
            return self._replay_inline(*cached)

        self._marker_serial += 1
        watch = _InlineWatch(
            marker=f"{_MARKER_PREFIX}{self._marker_serial}", serial=self._marker_serial
        )
        self._inline_watches.append(watch)
        self.frontier = self.frontier | {watch.marker}

        params = _param_names(node)  # type: ignore[arg-type]
        frame: dict[str, AbstractValue] = {p: UNKNOWN for p in params}
        for p, a in zip(_positional_params(node), args):
            frame[p] = a
        for name, v in kwargs.items():
            if name in frame:
                frame[name] = v
        env = Environment([self.base_frame, frame])
        self._inline_stack.append(node)
        self._return_stack.append([])
        self._exec_block(node.body, env)  # type: ignore[attr-defined]
        returns = self._return_stack.pop()
        self._inline_stack.pop()
        self._inline_watches.pop()

        result: AbstractValue = UNKNOWN
        raw_frontier = set(self.frontier)
        for value, frontier in returns:
            result = merge_values(result, value)
            raw_frontier |= frontier
        passes_through = watch.marker in raw_frontier
        # Drop this inline's marker and any minted inside it; enclosing
        # loop/inline markers stay alive for their own watchers.
        self.frontier = {
            f
            for f in raw_frontier
            if not (f.startswith(_MARKER_PREFIX) and _marker_serial_of(f) >= watch.serial)
        }
        summary = (
            result,
            frozenset(watch.entry_calls),
            frozenset(raw_frontier & watch.touched_calls),
            passes_through,
        )
        if sig is not None:
            self._inline_cache[sig] = summary
        return result

    def _replay_inline(
        self,
        result: AbstractValue,
        entries: frozenset[str],
        exits: frozenset[str],
        passes_through: bool,
    ) -> AbstractValue:
        for src in sorted(self.frontier):
            if src in self.graph.nodes:
                for dst in sorted(entries):
                    if src != dst:
                        self._edge(src, dst, "immediatelyPrecedes")
        for watch in self._loop_stack:
            if watch.marker in self.frontier:
                watch.entry_calls |= entries
        for inline_watch in self._inline_watches:
            inline_watch.touched_calls |= exits
            if inline_watch.marker in self.frontier:
                inline_watch.entry_calls |= entries
        new_frontier = set(exits)
        if passes_through:
            new_frontier |= self.frontier
        self.frontier = new_frontier
        return result


def _positional_params(node: ast.AST) -> list[str]:
    a = node.args  # type: ignore[attr-defined]
    return [p.arg for p in a.posonlyargs] + [p.arg for p in a.args]


def _capture_names(pattern: ast.AST) -> list[str]:
    names = []
    for sub in ast.walk(pattern):
        name = getattr(sub, "name", None)
        if isinstance(name, str):
            names.append(name)
    return names


def _constant_value(value: object) -> AbstractValue:
    if isinstance(value, bool):
        return Const(value, "boolean")
    if isinstance(value, int):
        return Const(value, "integer")
    if isinstance(value, float):
        return Const(value, "double")
    if isinstance(value, str):
        return Const(value, "string")
    if value is None:
        return Const(None, "none")
    return UNKNOWN  # bytes, Ellipsis, complex: not modeled as constants


def analyze_program(
    tree: SyntaxTree,
    imports: list[ImportBinding],
    digest: str,
    budget_seconds: float | None = None,
) -> ProgramGraph:
    """Analyze one parsed program into its ProgramGraph.

    Deterministic for fixed input. Raises AnalysisTimeout when the
    wall-clock budget is exceeded; the partial graph is discarded.
    """
    return Interpreter(tree, imports, digest, budget_seconds).run()
