"""Synthetic graphs and view-collection workloads.

Each workload returns a property graph and the GVDL text of a collection over
it, so it can go through the same parse / materialize / run path as user
input.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from .store import PropertyGraph, from_records


@dataclass(frozen=True)
class Workload:
    graph: PropertyGraph
    gvdl: str
    boundaries: tuple[int, ...] = ()  # view positions that start a new slide, if any


def _collection(name: str, graph: str, preds: list[str]) -> str:
    body = ",\n".join(f"    [GV{i + 1}: {p}]" for i, p in enumerate(preds))
    return f"create view collection {name} on {graph}\n{body}\n"


def timestamped_graph(n: int, m: int, first_year: int = 2000, last_year: int = 2019,
                      seed: int = 0) -> PropertyGraph:
    """Random directed multigraph; nodes carry ``rank``, edges ``year`` and ``duration``."""
    rng = random.Random(seed)
    nodes = [{"rank": i} for i in range(n)]
    edges = [(rng.randrange(n), rng.randrange(n),
              {"year": rng.randint(first_year, last_year), "duration": rng.randint(1, 60)})
             for _ in range(m)]
    return from_records(nodes, edges, {"rank": "int"}, {"year": "int", "duration": "int"})


def community_graph(communities: int, size: int, p_in: float = 0.3, p_out: float = 0.01,
                    seed: int = 0) -> PropertyGraph:
    """Planted-partition graph; node ``community`` is in ``0..communities-1``."""
    rng = random.Random(seed)
    n = communities * size
    nodes = [{"community": i // size} for i in range(n)]
    edges = []
    for u in range(n):
        for v in range(n):
            if u != v:
                p = p_in if u // size == v // size else p_out
                if rng.random() < p:
                    edges.append((u, v, {"duration": rng.randint(1, 60)}))
    return from_records(nodes, edges, {"community": "int"}, {"duration": "int"})


def expanding_window(g: PropertyGraph, start: int, end: int, w: int, graph: str = "G",
                     name: str = "expanding") -> Workload:
    """Views ``start <= year < start + i*w``; each contains the previous one."""
    preds = [f"year >= {start} and year < {hi}" for hi in range(start + w, end + w, w)]
    return Workload(g, _collection(name, graph, preds))


def sliding_window(g: PropertyGraph, start: int, end: int, w: int, graph: str = "G",
                   name: str = "sliding") -> Workload:
    """Non-overlapping windows of ``w`` years."""
    preds = [f"year >= {lo} and year < {lo + w}" for lo in range(start, end, w)]
    return Workload(g, _collection(name, graph, preds))


def community_removal(g: PropertyGraph, n_comm: int, k: int, graph: str = "G",
                      name: str = "removal") -> Workload:
    """One view per k-combination of communities, dropping edges that touch them."""
    preds = []
    for combo in itertools.combinations(range(n_comm), k):
        touched = " or ".join(f"src.community = {c} or dst.community = {c}" for c in combo)
        preds.append(f"not ({touched})")
    return Workload(g, _collection(name, graph, preds))


def churn_graph(initial: int, adds: int, dels: int, views: int, n: int, seed: int = 0) -> PropertyGraph:
    """Edges with lifetimes ``[born, dies)``: each step adds and deletes a fixed number."""
    rng = random.Random(seed)
    edges, alive = [], []
    for _ in range(initial):
        edges.append([rng.randrange(n), rng.randrange(n), 0, views])
        alive.append(len(edges) - 1)
    for t in range(1, views):
        for i in rng.sample(alive, min(dels, len(alive))):
            edges[i][3] = t
            alive.remove(i)
        for _ in range(adds):
            edges.append([rng.randrange(n), rng.randrange(n), t, views])
            alive.append(len(edges) - 1)
    return from_records([{"rank": i} for i in range(n)],
                        [(s, d, {"born": b, "dies": x}) for s, d, b, x in edges],
                        {"rank": "int"}, {"born": "int", "dies": "int"})


def random_churn(g: PropertyGraph, views: int, graph: str = "G", name: str = "churn") -> Workload:
    preds = [f"born <= {t} and dies > {t}" for t in range(views)]
    return Workload(g, _collection(name, graph, preds))


def author_year_windows(g: PropertyGraph, start: int, end: int, year_w: int, rank_steps: int,
                        graph: str = "G", name: str = "author-year") -> Workload:
    """Sliding year windows, each scanned with expanding node-rank windows.

    Within a year window the views nest; moving to the next year window
    replaces the whole edge set.
    """
    n = g.num_nodes
    step = max(1, -(-n // rank_steps))
    preds, boundaries = [], []
    for lo in range(start, end, year_w):
        boundaries.append(len(preds))
        for j in range(1, rank_steps + 1):
            r = min(n, j * step)
            preds.append(f"year >= {lo} and year < {lo + year_w} and src.rank < {r} and dst.rank < {r}")
    return Workload(g, _collection(name, graph, preds), tuple(boundaries[1:]))


def identical_views(g: PropertyGraph, k: int, graph: str = "G", name: str = "same") -> Workload:
    return Workload(g, _collection(name, graph, ["ID >= 0"] * k))
