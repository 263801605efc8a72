"""Built-in graph analytics as dataflows, plus sequential reference versions.

All dataflows read an ``edges`` input of ``(src, dst, weight)`` records and
write ``(vertex, result)`` records (``((src, dst), dist)`` for mpsp). The
vertex set of a run is the optional static ``nodes`` input plus every edge
endpoint (plus the source, for the traversals).
"""
from __future__ import annotations

import heapq
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .engine import INF, Collection, Dataflow
from .errors import TypeMismatch, UnknownProperty, UnknownSource
from .store import PropertyGraph

ALGORITHMS = ("wcc", "scc", "bfs", "sssp", "pr", "mpsp")


@dataclass(frozen=True)
class AnalyticsSpec:
    algorithm: str
    source: int = 0
    pairs: tuple[tuple[int, int], ...] = ()
    iters: int = 10
    damping: float = 0.85
    weight_prop: str | None = None  # sssp/mpsp only; None means unit weights

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")

    @property
    def weighted(self) -> bool:
        return self.algorithm in ("sssp", "mpsp") and self.weight_prop is not None


def default_spec(algorithm: str, g: PropertyGraph, **kw) -> AnalyticsSpec:
    """Spec with the weight property defaulting to ``duration`` when the graph has it."""
    if algorithm in ("sssp", "mpsp") and "weight_prop" not in kw and g.edge_schema.get("duration") == "int":
        kw["weight_prop"] = "duration"
    return AnalyticsSpec(algorithm, **kw)


def validate(spec: AnalyticsSpec, g: PropertyGraph) -> None:
    n = g.num_nodes
    if spec.algorithm in ("bfs", "sssp") and not 0 <= spec.source < n:
        raise UnknownSource(f"source {spec.source} is not a node of the graph (0..{n - 1})")
    if spec.algorithm == "mpsp":
        for s, d in spec.pairs:
            if not (0 <= s < n and 0 <= d < n):
                raise UnknownSource(f"pair ({s}, {d}) references a node outside 0..{n - 1}")
    if spec.weighted:
        typ = g.edge_schema.get(spec.weight_prop)
        if typ is None:
            raise UnknownProperty(spec.weight_prop)
        if typ != "int":
            raise TypeMismatch(f"weight property {spec.weight_prop!r} must be int, not {typ}")
        for e in g.edges:
            if e.props[spec.weight_prop] < 0:
                raise TypeMismatch(f"edge {e.eid} has negative weight {e.props[spec.weight_prop]}")


def edge_record(g: PropertyGraph, eid: int, spec: AnalyticsSpec) -> tuple[int, int, int]:
    e = g.edges[eid]
    w = e.props[spec.weight_prop] if spec.weighted else 1
    return (e.src, e.dst, w)


def edge_records(g: PropertyGraph, eids: Iterable[int], spec: AnalyticsSpec) -> dict:
    out: dict = defaultdict(int)
    for eid in eids:
        out[edge_record(g, eid, spec)] += 1
    return dict(out)


def edge_deltas(g: PropertyGraph, eds, spec: AnalyticsSpec) -> list[dict]:
    """Translate an edge difference stream into engine input differences."""
    out = []
    for d in eds.diffs:
        delta: dict = defaultdict(int)
        for eid, mult in d:
            delta[edge_record(g, eid, spec)] += mult
        out.append({r: m for r, m in delta.items() if m})
    return out


# ---------------------------------------------------------------------------
# reduce functions


def _min(k, vals):
    return [(min(v for v, _ in vals), 1)]


def _vertices(df: Dataflow, edges: Collection, extra: Collection | None = None) -> Collection:
    ends = edges.flat_map(lambda e: (e[0], e[1])).concat(df.input("nodes"))
    if extra is not None:
        ends = ends.concat(extra)
    return ends.distinct()


def _finite(kv) -> bool:
    return kv[1] != INF


# ---------------------------------------------------------------------------
# dataflows


def wcc_dataflow(df: Dataflow) -> Collection:
    edges = df.input("edges")
    both = edges.flat_map(lambda e: ((e[0], e[1]), (e[1], e[0])))
    init = _vertices(df, edges).map(lambda v: (v, v))
    return init.iterate(
        lambda labels: labels.join(both, lambda u, lab, v: (v, lab)).concat(init).reduce(_min)
    )


def shortest_path_dataflow(df: Dataflow, source: int, probe: str | None = None,
                           unit: bool = False) -> Collection:
    """Bellman-Ford: each round joins distances with edges and keeps the minimum."""
    edges = df.input("edges")
    if unit:
        keyed = edges.map(lambda e: (e[0], (e[1], 1)))
    else:
        keyed = edges.map(lambda e: (e[0], (e[1], e[2])))
    verts = _vertices(df, edges, df.constant([source]))
    init = verts.map(lambda v: (v, 0 if v == source else INF))

    def body(dist: Collection) -> Collection:
        if probe:
            dist = dist.probe(probe)
        msgs = dist.filter(_finite).join(keyed, lambda u, d, vw: (vw[0], d + vw[1]))
        return dist.concat(msgs).reduce(_min)

    return init.iterate(body).filter(_finite)


def mpsp_dataflow(df: Dataflow, pairs: Sequence[tuple[int, int]]) -> Collection:
    edges = df.input("edges")
    keyed = edges.map(lambda e: (e[0], (e[1], e[2])))
    sources = sorted({s for s, _ in pairs})
    wanted = frozenset(pairs)
    init = df.constant([((s, s), 0) for s in sources])

    def body(lab: Collection) -> Collection:
        msgs = (lab.map(lambda kv: (kv[0][0], (kv[0][1], kv[1])))
                .join(keyed, lambda u, sd, vw: ((vw[0], sd[0]), sd[1] + vw[1])))
        return lab.concat(msgs).reduce(_min)

    labels = init.iterate(body)
    return (labels.map(lambda kv: ((kv[0][1], kv[0][0]), kv[1]))
            .filter(lambda kv: kv[0] in wanted))


def pagerank_dataflow(df: Dataflow, iters: int, damping: float) -> Collection:
    """Fixed-round PageRank; dangling mass is spread uniformly over all vertices."""
    edges = df.input("edges")
    verts = _vertices(df, edges)
    n = verts.map(lambda v: ((), None)).count()
    deg = edges.map(lambda e: (e[0], None)).count()
    out_edges = edges.map(lambda e: (e[0], e[1]))
    dangling = verts.map(lambda v: (v, None)).antijoin(deg.map(lambda kv: kv[0]))
    every = verts.map(lambda v: ((), v))
    ranks = every.join(n, lambda k, v, cnt: (v, 1.0 / cnt))
    d = damping

    def glob(k, vals):
        cnt = sum(m for v, m in vals if v[0] == "n")
        mass = math.fsum(v[1] * m for v, m in vals if v[0] == "d")
        return [((cnt, mass), 1)]

    def total(k, vals):
        return [(math.fsum(v[-1] * m for v, m in vals), 1)]

    for _ in range(iters):
        g = (verts.map(lambda v: ((), ("n", v)))
             .concat(ranks.join(dangling, lambda v, r, _: ((), ("d", r, v))))
             .reduce(glob))
        base = every.join(g, lambda k, v, nm: (v, ("b", (1 - d) / nm[0] + d * nm[1] / nm[0])))
        share = ranks.join(deg, lambda u, r, c: (u, d * r / c))
        contrib = share.join(out_edges, lambda u, x, v: (v, ("c", u, x)))
        ranks = base.concat(contrib).reduce(total)
    return ranks


def scc_dataflow(df: Dataflow) -> Collection:
    """Coloring: forward min-colour propagation, then backward reachability per colour.

    The outer loop state is a tagged collection of remaining vertices
    ``("V", v)``, remaining edges ``("E", u, v)`` and settled vertices
    ``("S", v, colour)``.
    """
    edges = df.input("edges")
    verts = _vertices(df, edges)
    state = (verts.map(lambda v: ("V", v))
             .concat(edges.map(lambda e: ("E", e[0], e[1])).distinct()))

    def round_(x: Collection) -> Collection:
        v_rem = x.filter(lambda r: r[0] == "V").map(lambda r: r[1])
        e_rem = x.filter(lambda r: r[0] == "E")
        settled = x.filter(lambda r: r[0] == "S")
        fwd = e_rem.map(lambda r: (r[1], r[2]))
        bwd = e_rem.map(lambda r: (r[2], r[1]))
        init = v_rem.map(lambda v: (v, v))
        colour = init.iterate(
            lambda c: c.join(fwd, lambda u, col, v: (v, col)).concat(init).reduce(_min)
        )
        same = colour.map(lambda vc: (vc, None))
        roots = colour.filter(lambda vc: vc[0] == vc[1])

        def back(r: Collection) -> Collection:
            step = r.join(bwd, lambda v, col, u: ((u, col), None))
            step = step.semijoin(same.map(lambda kv: kv[0])).map(lambda kv: kv[0])
            return r.concat(step).distinct()

        reached = roots.iterate(back)
        gone = reached.map(lambda vc: vc[0])
        e_left = (fwd.antijoin(gone).map(lambda uv: (uv[1], uv[0]))
                  .antijoin(gone).map(lambda vu: ("E", vu[1], vu[0])))
        v_left = v_rem.map(lambda v: (v, None)).antijoin(gone).map(lambda kv: ("V", kv[0]))
        return v_left.concat(e_left, settled, reached.map(lambda vc: ("S", vc[0], vc[1])))

    final = state.iterate(round_)
    return final.filter(lambda r: r[0] == "S").map(lambda r: (r[1], r[2]))


def build_dataflow(spec: AnalyticsSpec, probe: str | None = None) -> Dataflow:
    df = Dataflow()
    df.input("nodes")  # declared for every algorithm so callers can always feed it
    a = spec.algorithm
    if a == "wcc":
        out = wcc_dataflow(df)
    elif a == "scc":
        out = scc_dataflow(df)
    elif a in ("bfs", "sssp"):
        out = shortest_path_dataflow(df, spec.source, probe, unit=a == "bfs")
    elif a == "pr":
        out = pagerank_dataflow(df, spec.iters, spec.damping)
    else:
        out = mpsp_dataflow(df, spec.pairs)
    df.output(out)
    return df


# ---------------------------------------------------------------------------
# sequential reference implementations


def _as_list(edges) -> list[tuple[int, int, int]]:
    if isinstance(edges, dict):
        out = []
        for r, m in edges.items():
            out.extend([r] * m)
        return out
    return list(edges)


def _endpoints(edges, nodes=()) -> set[int]:
    return {x for s, d, _ in edges for x in (s, d)} | set(nodes)


def wcc_oracle(edges, nodes=()) -> dict[int, int]:
    parent = {v: v for v in _endpoints(edges, nodes)}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for s, d, _ in edges:
        a, b = find(s), find(d)
        if a != b:
            parent[max(a, b)] = min(a, b)
    return {v: find(v) for v in parent}


def scc_oracle(edges, nodes=()) -> dict[int, int]:
    """Tarjan's algorithm (iterative); each SCC is labelled by its smallest vertex."""
    adj: dict[int, list[int]] = defaultdict(list)
    for s, d, _ in edges:
        adj[s].append(d)
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    label: dict[int, int] = {}
    counter = 0
    for root in sorted(_endpoints(edges, nodes)):
        if root in index:
            continue
        work = [(root, 0)]
        while work:
            v, i = work.pop()
            if i == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack.add(v)
            nbrs = adj[v]
            if i < len(nbrs):
                work.append((v, i + 1))
                w = nbrs[i]
                if w not in index:
                    work.append((w, 0))
                elif w in on_stack:
                    low[v] = min(low[v], index[w])
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                m = min(comp)
                for w in comp:
                    label[w] = m
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return label


def dijkstra(edges, source: int) -> dict[int, int]:
    adj: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for s, d, w in edges:
        adj[s].append((d, w))
    dist = {source: 0}
    heap = [(0, source)]
    while heap:
        d, v = heapq.heappop(heap)
        if d > dist[v]:
            continue
        for u, w in adj[v]:
            if d + w < dist.get(u, INF):
                dist[u] = d + w
                heapq.heappush(heap, (d + w, u))
    return dist


def bfs_oracle(edges, source: int) -> dict[int, int]:
    adj: dict[int, list[int]] = defaultdict(list)
    for s, d, _ in edges:
        adj[s].append(d)
    dist = {source: 0}
    frontier = [source]
    while frontier:
        nxt = []
        for v in frontier:
            for u in adj[v]:
                if u not in dist:
                    dist[u] = dist[v] + 1
                    nxt.append(u)
        frontier = nxt
    return dist


def pagerank_oracle(edges, iters: int = 10, damping: float = 0.85, nodes=()) -> dict[int, float]:
    verts = sorted(_endpoints(edges, nodes))
    n = len(verts)
    if n == 0:
        return {}
    out: dict[int, list[int]] = defaultdict(list)
    for s, d, _ in edges:
        out[s].append(d)
    rank = {v: 1.0 / n for v in verts}
    for _ in range(iters):
        mass = math.fsum(rank[v] for v in verts if not out[v])
        base = (1 - damping) / n + damping * mass / n
        parts: dict[int, list[float]] = {v: [base] for v in verts}
        for u in verts:
            if out[u]:
                share = damping * rank[u] / len(out[u])
                for v in out[u]:
                    parts[v].append(share)
        rank = {v: math.fsum(p) for v, p in parts.items()}
    return rank


def scratch_oracle(spec: AnalyticsSpec, edges, nodes: Iterable[int] = ()) -> dict:
    """Reference result for one view, as ``{key: result}``."""
    nodes = tuple(nodes)
    edges = _as_list(edges)
    a = spec.algorithm
    if a == "wcc":
        return wcc_oracle(edges, nodes)
    if a == "scc":
        return scc_oracle(edges, nodes)
    if a == "bfs":
        return bfs_oracle(edges, spec.source)
    if a == "sssp":
        return dijkstra(edges, spec.source)
    if a == "pr":
        return pagerank_oracle(edges, spec.iters, spec.damping, nodes)
    out = {}
    for s in sorted({s for s, _ in spec.pairs}):
        dist = dijkstra(edges, s)
        for p in spec.pairs:
            if p[0] == s and p[1] in dist:
                out[p] = dist[p[1]]
    return out


def as_result(delta: dict) -> dict:
    """``{(key, value): 1}`` -> ``{key: value}``."""
    out = {}
    for (k, v), m in delta.items():
        if m != 1 or k in out:
            raise ValueError(f"not a function-valued result at key {k!r}")
        out[k] = v
    return out


def results_match(spec: AnalyticsSpec, got: dict, want: dict, tol: float = 1e-9) -> bool:
    if got.keys() != want.keys():
        return False
    if spec.algorithm == "pr":
        return all(abs(got[k] - want[k]) <= tol for k in want)
    return got == want
