"""A small differential dataflow engine with partially ordered timestamps.

Collections are multisets of records stored as difference sets keyed by
timestamps. At the top level a timestamp is ``(view,)``; every ``iterate``
appends an iteration coordinate, so a loop body runs at ``(view, iter)`` and a
nested loop at ``(view, outer, inner)``. Timestamps are compared with the
product order and the state of a collection at ``t`` is the sum of its
differences at all ``s <= t``.

Linear operators (map, filter, concat, negate) act on differences directly.
``join`` is bilinear: a new difference at ``t`` meets every earlier difference
of the other side at ``s`` and the product lands at ``t v s`` (coordinate-wise
max). ``reduce`` recomputes a key only at times in the join-closure of that
key's input difference times, producing
``f(input state at t) - sum of earlier output differences``. Keys whose input
did not change are never touched, which is where the work sharing between
views comes from.

Times are processed view-major and then in lexicographic iteration order,
which is a linear extension of the product order.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from .errors import InconsistentStream, NonTermination

INF = math.inf
DEFAULT_ITERATION_CAP = 10**6

Time = tuple
Delta = dict  # record -> nonzero multiplicity


def leq(a: Time, b: Time) -> bool:
    return all(x <= y for x, y in zip(a, b))


def lub(a: Time, b: Time) -> Time:
    return tuple(x if x >= y else y for x, y in zip(a, b))


def add_into(d: Delta, rec, mult: int) -> None:
    m = d.get(rec, 0) + mult
    if m:
        d[rec] = m
    else:
        d.pop(rec, None)


def as_delta(records) -> Delta:
    """Normalise a mapping record->mult or an iterable of records (mult 1 each)."""
    out: Delta = {}
    if isinstance(records, Mapping):
        for r, m in records.items():
            add_into(out, r, m)
    else:
        for r in records:
            add_into(out, r, 1)
    return out


# ---------------------------------------------------------------------------
# dataflow graph


class Scope:
    def __init__(self, depth: int, parent: "Scope | None" = None):
        self.depth = depth
        self.parent = parent
        self.nodes: list[Node] = []
        self.children: list[Scope] = []
        if parent is not None:
            parent.children.append(self)

    def descendants(self) -> list["Scope"]:
        out = [self]
        for c in self.children:
            out.extend(c.descendants())
        return out

    def is_ancestor_of(self, other: "Scope") -> bool:
        while other is not None:
            if other is self:
                return True
            other = other.parent
        return False


@dataclass(eq=False)
class Node:
    id: int
    kind: str
    scope: Scope
    inputs: list = field(default_factory=list)
    fn: Callable | None = None
    name: str = ""
    # iterate-specific
    inner: Scope | None = None
    variable: "Node | None" = None
    result: "Node | None" = None
    max_iters: int | None = None


class Dataflow:
    """Static operator graph built through :class:`Collection` handles."""

    def __init__(self):
        self.root = Scope(1)
        self.nodes: list[Node] = []
        self.inputs: dict[str, Node] = {}
        self.constants: list[tuple[Node, Delta]] = []
        self.outputs: dict[str, Node] = {}
        self._entered: dict[tuple[int, int], Node] = {}

    def _node(self, kind: str, scope: Scope, inputs=(), **kw) -> Node:
        node = Node(len(self.nodes), kind, scope, list(inputs), **kw)
        self.nodes.append(node)
        scope.nodes.append(node)
        return node

    def input(self, name: str) -> "Collection":
        if name in self.inputs:
            return Collection(self, self.inputs[name])
        node = self._node("input", self.root, name=name)
        self.inputs[name] = node
        return Collection(self, node)

    def constant(self, records) -> "Collection":
        """A collection fixed at the first view of every run."""
        node = self._node("input", self.root, name=f"const{len(self.constants)}")
        self.constants.append((node, as_delta(records)))
        return Collection(self, node)

    def output(self, coll: "Collection", name: str = "out") -> None:
        if coll.node.scope is not self.root:
            raise ValueError("outputs must live in the top-level scope")
        self.outputs[name] = coll.node

    def _lift(self, node: Node, target: Scope) -> Node:
        if node.scope is target:
            return node
        if target.parent is None or not node.scope.is_ancestor_of(target):
            raise ValueError("cannot combine collections from unrelated scopes")
        outer = self._lift(node, target.parent)
        key = (outer.id, id(target))
        if key not in self._entered:
            self._entered[key] = self._node("enter", target, [outer])
        return self._entered[key]

    def _common_scope(self, nodes: Iterable[Node]) -> Scope:
        nodes = list(nodes)
        deepest = max((n.scope for n in nodes), key=lambda s: s.depth)
        for n in nodes:
            if not n.scope.is_ancestor_of(deepest):
                raise ValueError("cannot combine collections from unrelated scopes")
        return deepest


class Collection:
    """Handle used to build dataflows; every method adds an operator."""

    def __init__(self, df: Dataflow, node: Node):
        self.df = df
        self.node = node

    def _unary(self, kind: str, fn=None, **kw) -> "Collection":
        return Collection(self.df, self.df._node(kind, self.node.scope, [self.node], fn=fn, **kw))

    def _nary(self, kind: str, others, fn=None) -> "Collection":
        nodes = [self.node] + [o.node for o in others]
        scope = self.df._common_scope(nodes)
        lifted = [self.df._lift(n, scope) for n in nodes]
        return Collection(self.df, self.df._node(kind, scope, lifted, fn=fn))

    def map(self, f: Callable) -> "Collection":
        return self._unary("map", f)

    def flat_map(self, f: Callable) -> "Collection":
        return self._unary("flat_map", f)

    def filter(self, p: Callable) -> "Collection":
        return self._unary("filter", p)

    def negate(self) -> "Collection":
        return self._unary("negate")

    def concat(self, *others: "Collection") -> "Collection":
        return self._nary("concat", others)

    def join(self, other: "Collection", f: Callable | None = None) -> "Collection":
        """Join ``(key, a)`` with ``(key, b)`` into ``f(key, a, b)`` (default ``(key, (a, b))``)."""
        return self._nary("join", [other], f or (lambda k, a, b: (k, (a, b))))

    def reduce(self, f: Callable) -> "Collection":
        """Group ``(key, val)`` records; ``f(key, [(val, mult), ...])`` returns ``[(out, mult), ...]``.

        ``f`` must not depend on the order of its input list.
        """
        return self._unary("reduce", f)

    def distinct(self) -> "Collection":
        return (self.map(lambda r: (r, None))
                .reduce(lambda k, vals: [(None, 1)])
                .map(lambda kv: kv[0]))

    def count(self) -> "Collection":
        return self.reduce(lambda k, vals: [(sum(m for _, m in vals), 1)])

    def min(self) -> "Collection":
        return self.reduce(lambda k, vals: [(min(v for v, _ in vals), 1)])

    def semijoin(self, keys: "Collection") -> "Collection":
        """Keep ``(key, val)`` whose key appears in the distinct collection ``keys``."""
        return self.join(keys.map(lambda k: (k, None)), lambda k, a, b: (k, a))

    def antijoin(self, keys: "Collection") -> "Collection":
        return self.concat(self.semijoin(keys).negate())

    def probe(self, name: str) -> "Collection":
        """Identity operator that records every difference it sees."""
        return self._unary("probe", name=name)

    def iterate(self, body: Callable[["Collection"], "Collection"], max_iters: int | None = None) -> "Collection":
        """Run ``body`` to a fixpoint, starting from this collection.

        Collections from enclosing scopes may be used freely inside ``body``;
        they are entered automatically at iteration 0.
        """
        df = self.df
        outer = self.node.scope
        inner = Scope(outer.depth + 1, outer)
        var = Node(len(df.nodes), "variable", inner)
        df.nodes.append(var)
        inner.nodes.append(var)
        res = body(Collection(df, var))
        res_node = df._lift(res.node, inner)
        it = df._node("iterate", outer, [self.node], inner=inner, variable=var,
                      result=res_node, max_iters=max_iters)
        var.inputs = [self.node]
        return Collection(df, it)


# ---------------------------------------------------------------------------
# execution


class _JoinState:
    __slots__ = ("left", "right")

    def __init__(self):
        self.left: dict = defaultdict(list)   # key -> [(time, {val: mult})]
        self.right: dict = defaultdict(list)


class _ReduceState:
    __slots__ = ("inp", "out", "times", "pending")

    def __init__(self):
        self.inp: dict = defaultdict(list)    # key -> [(time, {val: mult})]
        self.out: dict = defaultdict(list)
        self.times: dict = defaultdict(set)   # key -> join-closure of input times
        self.pending: dict = defaultdict(set)  # time -> keys to re-evaluate


def _group(delta: Delta) -> dict:
    by_key: dict = defaultdict(dict)
    for (k, v), m in delta.items():
        by_key[k][v] = m
    return by_key


class Execution:
    """Mutable run state of a dataflow; feed one view at a time with :meth:`step`."""

    def __init__(self, df: Dataflow, iteration_cap: int = DEFAULT_ITERATION_CAP):
        self.df = df
        self.cap = iteration_cap
        self.view = -1
        self.out: list[dict] = [dict() for _ in df.nodes]  # node -> time -> Delta
        self.state: dict[int, object] = {}
        for n in df.nodes:
            if n.kind == "join":
                self.state[n.id] = _JoinState()
            elif n.kind == "reduce":
                self.state[n.id] = _ReduceState()
        self.future: dict[int, set] = defaultdict(set)  # id(scope) -> pending times
        self.work: list[int] = []
        self.probes: dict[str, list[tuple[Time, Delta]]] = defaultdict(list)
        self._feed: dict[str, Delta] = {}

    # public -----------------------------------------------------------------

    def step(self, inputs: Mapping[str, object] | None = None) -> dict[str, Delta]:
        """Advance to the next view with the given input differences.

        Returns the output differences at this view, per output name.
        """
        self.view += 1
        self.work.append(0)
        feed = {}
        for name, recs in (inputs or {}).items():
            if name not in self.df.inputs:
                raise KeyError(f"dataflow has no input named {name!r}")
            feed[name] = as_delta(recs)
        self._feed = feed
        t = (self.view,)
        self._run_scope(self.df.root, t)
        leftover = {s: ts for s, ts in self.future.items() if ts}
        if leftover:
            raise InconsistentStream(f"unprocessed times after view {self.view}: {leftover}")
        return {name: dict(self.out[n.id].get(t, {})) for name, n in self.df.outputs.items()}

    # scheduling ---------------------------------------------------------------

    def _notify(self, node: Node, t: Time) -> None:
        self.future[id(node.scope)].add(t)

    def _run_scope(self, scope: Scope, t: Time) -> None:
        self.future[id(scope)].discard(t)
        for node in scope.nodes:
            self._process(node, t)

    def _pending_after(self, scopes: list[Scope], prefix: Time, i: int) -> bool:
        L = len(prefix)
        for s in scopes:
            for p in self.future[id(s)]:
                if p[:L] == prefix and p[L] > i:
                    return True
        return False

    # operators ----------------------------------------------------------------

    def _in(self, node: Node, t: Time, idx: int = 0) -> Delta:
        return self.out[node.inputs[idx].id].get(t, {})

    def _emit(self, node: Node, t: Time, delta: Delta) -> None:
        if delta:
            cur = self.out[node.id].get(t)
            if cur:
                for r, m in delta.items():
                    add_into(cur, r, m)
                if not cur:
                    del self.out[node.id][t]
            else:
                self.out[node.id][t] = delta

    def _process(self, node: Node, t: Time) -> None:
        kind = node.kind
        if kind == "input":
            if t[0] == 0 and any(node is n for n, _ in self.df.constants):
                d = dict(next(d for n, d in self.df.constants if n is node))
            else:
                d = dict(self._feed.get(node.name, {}))
            self._emit(node, t, d)
        elif kind == "map":
            out: Delta = {}
            for r, m in self._in(node, t).items():
                add_into(out, node.fn(r), m)
            self._emit(node, t, out)
        elif kind == "flat_map":
            out = {}
            for r, m in self._in(node, t).items():
                for r2 in node.fn(r):
                    add_into(out, r2, m)
            self._emit(node, t, out)
        elif kind == "filter":
            self._emit(node, t, {r: m for r, m in self._in(node, t).items() if node.fn(r)})
        elif kind == "negate":
            self._emit(node, t, {r: -m for r, m in self._in(node, t).items()})
        elif kind == "concat":
            out = {}
            for idx in range(len(node.inputs)):
                for r, m in self._in(node, t, idx).items():
                    add_into(out, r, m)
            self._emit(node, t, out)
        elif kind == "probe":
            d = dict(self._in(node, t))
            if d:
                self.probes[node.name].append((t, dict(d)))
            self._emit(node, t, d)
        elif kind == "enter":
            if t[-1] == 0:
                self._emit(node, t, dict(self.out[node.inputs[0].id].get(t[:-1], {})))
        elif kind == "variable":
            self._variable(node, t)
        elif kind == "join":
            self._join(node, t)
        elif kind == "reduce":
            self._reduce(node, t)
        elif kind == "iterate":
            self._iterate(node, t)
        else:
            raise ValueError(f"unknown operator {kind}")

    def _variable(self, node: Node, t: Time) -> None:
        T, i = t[:-1], t[-1]
        init = self.out[node.inputs[0].id].get(T, {})
        out: Delta = {}
        if i == 0:
            out = dict(init)
        else:
            it = self._owner(node)
            for r, m in self.out[it.result.id].get(T + (i - 1,), {}).items():
                add_into(out, r, m)
            if i == 1:
                for r, m in init.items():
                    add_into(out, r, -m)
        self._emit(node, t, out)

    def _owner(self, var: Node) -> Node:
        owner = getattr(self, "_owners", None)
        if owner is None:
            owner = self._owners = {n.variable.id: n for n in self.df.nodes if n.kind == "iterate"}
        return owner[var.id]

    def _join(self, node: Node, t: Time) -> None:
        st: _JoinState = self.state[node.id]
        f = node.fn
        da, db = _group(self._in(node, t, 0)), _group(self._in(node, t, 1))
        if not da and not db:
            return
        self.work[t[0]] += len(da.keys() | db.keys())
        emitted: dict[Time, Delta] = defaultdict(dict)
        for k, avals in da.items():
            for s, bvals in st.right.get(k, ()):
                tt = lub(t, s)
                bucket = emitted[tt]
                for a, ma in avals.items():
                    for b, mb in bvals.items():
                        add_into(bucket, f(k, a, b), ma * mb)
            bvals = db.get(k)
            if bvals:
                bucket = emitted[t]
                for a, ma in avals.items():
                    for b, mb in bvals.items():
                        add_into(bucket, f(k, a, b), ma * mb)
        for k, bvals in db.items():
            for s, avals in st.left.get(k, ()):
                tt = lub(t, s)
                bucket = emitted[tt]
                for a, ma in avals.items():
                    for b, mb in bvals.items():
                        add_into(bucket, f(k, a, b), ma * mb)
        for k, avals in da.items():
            st.left[k].append((t, avals))
        for k, bvals in db.items():
            st.right[k].append((t, bvals))
        for tt, d in emitted.items():
            if tt != t and d:
                self._notify(node, tt)
            self._emit(node, tt, d)

    def _reduce(self, node: Node, t: Time) -> None:
        st: _ReduceState = self.state[node.id]
        todo = st.pending.pop(t, set())
        for k, vals in _group(self._in(node, t)).items():
            st.inp[k].append((t, vals))
            closure = st.times[k]
            new = {t} | {lub(t, s) for s in closure}
            for tt in new - closure:
                closure.add(tt)
                if tt == t:
                    todo.add(k)
                else:
                    st.pending[tt].add(k)
                    self._notify(node, tt)
        if not todo:
            return
        self.work[t[0]] += len(todo)
        out: Delta = {}
        for k in todo:
            acc: dict = {}
            for s, vals in st.inp[k]:
                if leq(s, t):
                    for v, m in vals.items():
                        add_into(acc, v, m)
            if any(m < 0 for m in acc.values()):
                raise InconsistentStream(f"negative multiplicity for key {k!r} at {t}")
            target: dict = {}
            if acc:
                for v, m in node.fn(k, list(acc.items())):
                    add_into(target, v, m)
            for s, vals in st.out[k]:
                if leq(s, t):
                    for v, m in vals.items():
                        add_into(target, v, -m)
            if target:
                st.out[k].append((t, target))
                for v, m in target.items():
                    add_into(out, (k, v), m)
        self._emit(node, t, out)

    def _iterate(self, node: Node, T: Time) -> None:
        inner = node.inner
        scopes = inner.descendants()
        cap = node.max_iters if node.max_iters is not None else self.cap
        total: Delta = {}
        res_out = self.out[node.result.id]
        has_init = bool(self.out[node.inputs[0].id].get(T))
        i = 0
        while True:
            if i > cap:
                raise NonTermination(f"no fixpoint after {cap} iterations at {T}")
            t = T + (i,)
            self._run_scope(inner, t)
            for r, m in res_out.get(t, {}).items():
                add_into(total, r, m)
            if not (res_out.get(t) or (i == 0 and has_init) or self._pending_after(scopes, T, i)):
                break
            i += 1
        # per-iteration buffers of this outer time are no longer needed
        L = len(T)
        for s in scopes:
            for n in s.nodes:
                buf = self.out[n.id]
                for tt in [tt for tt in buf if tt[:L] == T]:
                    del buf[tt]
        self._emit(node, T, total)


# ---------------------------------------------------------------------------
# running on views and collections


@dataclass
class OutputDiffStream:
    deltas: list[Delta]
    work: list[int]

    @property
    def k(self) -> int:
        return len(self.deltas)

    def diff_volume(self) -> int:
        return sum(len(d) for d in self.deltas)


def _check_set(acc: Delta, where: str) -> Delta:
    bad = {r: m for r, m in acc.items() if m != 1}
    if bad:
        raise InconsistentStream(f"{where}: records with multiplicity other than 1: {list(bad.items())[:5]}")
    return acc


def accumulate(out: OutputDiffStream, t: int) -> Delta:
    if not 0 <= t < out.k:
        raise IndexError(f"view {t} out of range 0..{out.k - 1}")
    acc: Delta = {}
    for d in out.deltas[: t + 1]:
        for r, m in d.items():
            add_into(acc, r, m)
    return _check_set(acc, f"view {t}")


def run_on_view(df: Dataflow, edges, inputs: Mapping[str, object] | None = None,
                output: str = "out", iteration_cap: int = DEFAULT_ITERATION_CAP) -> Delta:
    """Run the dataflow once over a complete edge multiset."""
    ex = Execution(df, iteration_cap)
    feed = dict(inputs or {})
    feed["edges"] = edges
    return _check_set(ex.step(feed)[output], "scratch run")


def run_on_collection(df: Dataflow, edge_deltas: list, inputs: Mapping[str, object] | None = None,
                      output: str = "out", iteration_cap: int = DEFAULT_ITERATION_CAP,
                      execution: Execution | None = None) -> OutputDiffStream:
    """Feed one edge difference set per view; ``inputs`` are fed with the first view only."""
    ex = execution or Execution(df, iteration_cap)
    deltas, work = [], []
    for t, d in enumerate(edge_deltas):
        feed = dict(inputs or {}) if t == 0 else {}
        feed["edges"] = d
        deltas.append(ex.step(feed)[output])
        work.append(ex.work[-1])
    return OutputDiffStream(deltas, work)
