"""Desk-scale experiments shared by the acceptance suite and ``scripts/``."""
from __future__ import annotations

import random
import statistics
import time
from dataclasses import dataclass, field

from .analytics import ALGORITHMS, AnalyticsSpec, as_result, build_dataflow, edge_deltas, results_match, scratch_oracle
from .engine import accumulate, as_delta, run_on_collection
from .generators import Workload, community_graph, community_removal
from .materialize import diff_count
from .ordering import optimize_order
from .pipeline import materialize_collection
from .splitting import SCRATCH, run_adaptive


# ---------------------------------------------------------------------------
# ordering benefit on community-removal collections


@dataclass(frozen=True)
class OrderingBenefitConfig:
    seeds: int = 54
    ns: tuple[int, ...] = (5, 6, 7)
    ks: tuple[int, ...] = (2, 3, 4)
    size_range: tuple[int, int] = (10, 25)
    p_in: float = 0.25
    p_out: float = 0.03
    random_orders: int = 5


@dataclass(frozen=True)
class OrderingRow:
    seed: int
    n_comm: int
    k: int
    edges: int
    optimized: int
    random_median: float
    default: int

    @property
    def win(self) -> bool:
        return self.optimized < self.random_median


def ordering_benefit(cfg: OrderingBenefitConfig = OrderingBenefitConfig()) -> list[OrderingRow]:
    configs = [(n, k) for n in cfg.ns for k in cfg.ks]
    rows = []
    for seed in range(cfg.seeds):
        n, k = configs[seed % len(configs)]
        rng = random.Random(seed)
        size = rng.randint(*cfg.size_range)
        g = community_graph(n, size, cfg.p_in, cfg.p_out, seed)
        ebm = materialize_collection(g, community_removal(g, n, k).gvdl, ordering="default").ebm
        rand = [diff_count(ebm, rng.sample(range(ebm.k), ebm.k)) for _ in range(cfg.random_orders)]
        rows.append(OrderingRow(seed, n, k, g.num_edges, diff_count(ebm, optimize_order(ebm)),
                                statistics.median(rand), diff_count(ebm, range(ebm.k))))
    return rows


# ---------------------------------------------------------------------------
# scratch equivalence on random collections


@dataclass(frozen=True)
class EquivalenceConfig:
    seeds: int = 100
    max_nodes: int = 200
    views: int = 5
    algorithms: tuple[str, ...] = ALGORITHMS


def random_collection(rng: random.Random, n: int, views: int) -> tuple[list[dict], list[list]]:
    """Input deltas and per-view edge lists of a drifting random collection."""
    m = rng.randint(0, 3 * n)
    pool = [(rng.randrange(n), rng.randrange(n), rng.randint(1, 20)) for _ in range(m)]
    cur = set(rng.sample(range(m), m // 2))
    deltas, edges, prev = [], [], set()
    for _ in range(views):
        for i in rng.sample(range(m), min(m, max(1, m // rng.choice((10, 4, 2))))):
            cur ^= {i}
        d: dict = {}
        for i in cur - prev:
            d[pool[i]] = d.get(pool[i], 0) + 1
        for i in prev - cur:
            d[pool[i]] = d.get(pool[i], 0) - 1
        deltas.append({r: c for r, c in d.items() if c})
        edges.append([pool[i] for i in sorted(cur)])
        prev = set(cur)
    return deltas, edges


@dataclass
class EquivalenceResult:
    checked: int = 0
    mismatches: list[tuple[str, int, int]] = field(default_factory=list)  # (algorithm, seed, view)
    seconds: float = 0.0


def scratch_equivalence(cfg: EquivalenceConfig = EquivalenceConfig()) -> EquivalenceResult:
    res = EquivalenceResult()
    t0 = time.perf_counter()
    for alg in cfg.algorithms:
        for seed in range(cfg.seeds):
            rng = random.Random(seed * 7919 + ALGORITHMS.index(alg))
            n = rng.randint(1, cfg.max_nodes)
            pairs = tuple((rng.randrange(n), rng.randrange(n)) for _ in range(3))
            spec = AnalyticsSpec(alg, source=rng.randrange(n), pairs=pairs, weight_prop="w")
            deltas, edges = random_collection(rng, n, cfg.views)
            if not spec.weighted:
                deltas = [_unit(d) for d in deltas]
                edges = [[(u, v, 1) for u, v, _ in es] for es in edges]
            out = run_on_collection(build_dataflow(spec), deltas)
            for t, es in enumerate(edges):
                res.checked += 1
                if not results_match(spec, as_result(accumulate(out, t)), scratch_oracle(spec, es)):
                    res.mismatches.append((alg, seed, t))
    res.seconds = time.perf_counter() - t0
    return res


def _unit(d: dict) -> dict:
    out: dict = {}
    for (u, v, _), m in d.items():
        out[(u, v, 1)] = out.get((u, v, 1), 0) + m
    return as_delta({r: m for r, m in out.items() if m})


# ---------------------------------------------------------------------------
# adaptive splitting


@dataclass(frozen=True)
class SplittingRow:
    algorithm: str
    decisions: tuple[str, ...]
    work_diff: int
    work_scratch: int
    work_adaptive: int

    @property
    def splits(self) -> list[int]:
        return [i for i, d in enumerate(self.decisions) if i > 0 and d == SCRATCH]


def splitting_experiment(wl: Workload, algorithms=("wcc", "pr", "bfs"), batch: int = 10,
                         all_nodes: bool = False) -> list[SplittingRow]:
    """Pure differential, pure scratch and adaptive work on one workload (work-counter proxy).

    By default the vertex set comes from edge endpoints only; ``all_nodes``
    also feeds every graph node as a static input, which adds a fixed cost to
    each scratch run.
    """
    mc = materialize_collection(wl.graph, wl.gvdl, ordering="default")  # keep boundary positions
    rows = []
    for alg in algorithms:
        spec = AnalyticsSpec(alg)
        df = build_dataflow(spec)
        deltas = edge_deltas(wl.graph, mc.eds, spec)
        static = {"nodes": list(range(wl.graph.num_nodes))} if all_nodes else None
        work = {}
        decisions: tuple[str, ...] = ()
        for mode in ("diff", "scratch", "adaptive"):
            _, log = run_adaptive(df, deltas, batch=batch, mode=mode, time_proxy="work", inputs=static)
            work[mode] = log.total_work
            if mode == "adaptive":
                decisions = tuple(log.decisions)
        rows.append(SplittingRow(alg, decisions, work["diff"], work["scratch"], work["adaptive"]))
    return rows
