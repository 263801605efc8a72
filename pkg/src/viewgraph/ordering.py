"""Collection ordering: Christofides on the zero-padded Hamming clique.

Node 0 of the clique is an all-zero column; nodes 1..k are the views. A
Hamiltonian path from node 0 through the views weighs exactly the number of
edge differences of that view order, so a short TSP tour with node 0 removed
gives a good order.
"""
from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import TooManyViews
from .materialize import EdgeBooleanMatrix, diff_count

EXACT_MATCHING_LIMIT = 12
BRUTE_FORCE_LIMIT = 8


@dataclass(frozen=True)
class HammingClique:
    weight: np.ndarray  # (k+1, k+1) int64, index 0 is the padded zero column

    @property
    def n(self) -> int:
        return self.weight.shape[0]

    def w(self, i: int, j: int) -> int:
        return int(self.weight[i, j])

    def tour_weight(self, tour) -> int:
        return sum(self.w(a, b) for a, b in zip(tour, tour[1:] + tour[:1]))


@dataclass(frozen=True)
class CandidateOrder:
    forward: tuple[int, ...]
    backward: tuple[int, ...]
    forward_ds: int | None = None
    backward_ds: int | None = None
    tour: tuple[int, ...] = field(default=())


def hamming_clique(ebm: EdgeBooleanMatrix, partitions: int = 1) -> HammingClique:
    """Pairwise Hamming distances of ``[0 | B]`` summed over row partitions.

    Each partition contributes ``C^T (U - C) + (U - C)^T C``.
    """
    m, k = ebm.bits.shape
    total = np.zeros((k + 1, k + 1), dtype=np.int64)
    bounds = np.linspace(0, m, max(1, partitions) + 1).astype(int)
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        c = np.zeros((hi - lo, k + 1), dtype=np.int64)
        c[:, 1:] = ebm.bits[lo:hi]
        u = np.ones_like(c)
        total += c.T @ (u - c) + (u - c).T @ c
    return HammingClique(total)


def minimum_spanning_tree(q: HammingClique) -> list[tuple[int, int]]:
    """Kruskal with ties broken by (weight, i, j)."""
    parent = list(range(q.n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    edges = sorted((q.w(i, j), i, j) for i in range(q.n) for j in range(i + 1, q.n))
    tree = []
    for _, i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            tree.append((i, j))
    return tree


def min_weight_perfect_matching(q: HammingClique, vertices: list[int]) -> list[tuple[int, int]]:
    """Exact for up to EXACT_MATCHING_LIMIT vertices, greedy nearest pair above."""
    vertices = sorted(vertices)
    if len(vertices) > EXACT_MATCHING_LIMIT:
        left = set(vertices)
        pairs = []
        for _, i, j in sorted((q.w(i, j), i, j) for i, j in itertools.combinations(vertices, 2)):
            if i in left and j in left:
                pairs.append((i, j))
                left -= {i, j}
        return pairs

    @lru_cache(maxsize=None)
    def best(mask: int) -> tuple[int, tuple]:
        if mask == 0:
            return 0, ()
        i = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << i)
        out = None
        for j in range(i + 1, len(vertices)):
            if rest >> j & 1:
                cost, pairs = best(rest & ~(1 << j))
                cost += q.w(vertices[i], vertices[j])
                if out is None or cost < out[0]:
                    out = (cost, ((vertices[i], vertices[j]),) + pairs)
        return out

    return list(best((1 << len(vertices)) - 1)[1])


def euler_tour(n: int, multi_edges: list[tuple[int, int]], start: int = 0) -> list[int]:
    """Hierholzer's algorithm, always following the smallest-index neighbour."""
    adj: dict[int, list[int]] = {v: [] for v in range(n)}
    for a, b in multi_edges:
        adj[a].append(b)
        adj[b].append(a)
    for v in adj:
        adj[v].sort(reverse=True)  # pop() yields the smallest
    stack, circuit = [start], []
    while stack:
        v = stack[-1]
        if adj[v]:
            u = adj[v].pop()
            adj[u].remove(v)
            stack.append(u)
        else:
            circuit.append(stack.pop())
    return circuit[::-1]


def christofides_tour(q: HammingClique) -> tuple[int, ...]:
    if q.n == 1:
        return (0,)
    if q.n == 2:
        return (0, 1)
    tree = minimum_spanning_tree(q)
    degree = [0] * q.n
    for a, b in tree:
        degree[a] += 1
        degree[b] += 1
    odd = [v for v in range(q.n) if degree[v] % 2]
    circuit = euler_tour(q.n, tree + min_weight_perfect_matching(q, odd))
    seen: set[int] = set()
    tour = []
    for v in circuit:
        if v not in seen:
            seen.add(v)
            tour.append(v)
    return tuple(tour)


def christofides_order(q: HammingClique, ebm: EdgeBooleanMatrix | None = None) -> CandidateOrder:
    """Both directions of the view chain left after removing node 0 from the tour."""
    tour = christofides_tour(q)
    i = tour.index(0)
    chain = tuple(v - 1 for v in tour[i + 1:] + tour[:i])
    back = chain[::-1]
    if ebm is None:
        return CandidateOrder(chain, back, tour=tour)
    return CandidateOrder(chain, back, diff_count(ebm, chain), diff_count(ebm, back), tour)


@dataclass
class OrderingReport:
    order: tuple[int, ...]
    ds_default: int
    ds_chosen: int
    seconds: float
    method: str


def optimize_order(ebm: EdgeBooleanMatrix, partitions: int = 1) -> tuple[int, ...]:
    if ebm.k <= 1:
        return tuple(range(ebm.k))
    cand = christofides_order(hamming_clique(ebm, partitions), ebm)
    if cand.forward_ds != cand.backward_ds:
        return cand.forward if cand.forward_ds < cand.backward_ds else cand.backward
    return cand.forward if cand.forward[0] <= cand.backward[0] else cand.backward


_PERMS: dict[int, np.ndarray] = {}


def _permutations(k: int) -> np.ndarray:
    if k not in _PERMS:
        _PERMS[k] = np.array(list(itertools.permutations(range(k))), dtype=np.int64).reshape(-1, k)
    return _PERMS[k]


def brute_force_order(ebm: EdgeBooleanMatrix) -> tuple[int, ...]:
    """Exact minimiser over all k! orders; first in lexicographic order on ties.

    Counts transitions directly on each reordered matrix; shares nothing with
    the clique construction it is used to check.
    """
    k = ebm.k
    if k > BRUTE_FORCE_LIMIT:
        raise TooManyViews(f"brute force supports at most {BRUTE_FORCE_LIMIT} views, got {k}")
    if k == 0:
        return ()
    perms = _permutations(k)
    bits = ebm.bits.astype(np.int8)
    best_cost, best_idx = None, 0
    for lo in range(0, len(perms), 4096):
        chunk = perms[lo:lo + 4096]
        m = bits[:, chunk]  # (rows, P, k)
        cost = (m[:, :, 0] != 0).sum(axis=0) + (m[:, :, 1:] != m[:, :, :-1]).sum(axis=(0, 2))
        i = int(np.argmin(cost))
        if best_cost is None or cost[i] < best_cost:
            best_cost, best_idx = int(cost[i]), lo + i
    return tuple(int(x) for x in perms[best_idx])


def brute_force_tour_weight(q: HammingClique) -> int:
    """Optimal Hamiltonian cycle weight by enumeration (node 0 fixed first)."""
    if q.n <= 2:
        return q.tour_weight(list(range(q.n)))
    best = None
    for rest in itertools.permutations(range(1, q.n)):
        w = q.tour_weight([0, *rest])
        best = w if best is None or w < best else best
    return best


def choose_order(ebm: EdgeBooleanMatrix, ordering: str = "optimized", partitions: int = 1) -> OrderingReport:
    """Resolve an ``optimized | default | random:<seed>`` ordering choice."""
    k = ebm.k
    default = tuple(range(k))
    t0 = time.perf_counter()
    if ordering == "optimized":
        order = optimize_order(ebm, partitions)
    elif ordering == "default":
        order = default
    elif ordering.startswith("random:"):
        rng = random.Random(int(ordering.split(":", 1)[1]))
        order = tuple(rng.sample(range(k), k))
    else:
        raise ValueError(f"unknown ordering {ordering!r}")
    seconds = time.perf_counter() - t0
    return OrderingReport(order, diff_count(ebm, default), diff_count(ebm, order), seconds, ordering)
