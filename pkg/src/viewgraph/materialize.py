"""Edge boolean matrices and edge difference streams for view collections."""
from __future__ import annotations

from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import InconsistentStream, SchemaError
from .gvdl import BoundCollection, ViewCollectionDef, bind
from .store import PropertyGraph


@dataclass(frozen=True)
class EdgeBooleanMatrix:
    """Row ``e`` holds the membership bits of edge ``e`` in each of the ``k`` views."""

    bits: np.ndarray  # (num_edges, k) bool
    view_names: tuple[str, ...]

    @property
    def k(self) -> int:
        return self.bits.shape[1]

    @property
    def num_rows(self) -> int:
        return self.bits.shape[0]

    def row(self, e: int) -> tuple[int, ...]:
        return tuple(int(b) for b in self.bits[e])

    def column(self, j: int) -> np.ndarray:
        return self.bits[:, j]

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], view_names: Sequence[str] | None = None):
        arr = np.asarray(rows, dtype=bool)
        if arr.ndim != 2:
            arr = arr.reshape(len(rows), -1)
        names = tuple(view_names) if view_names is not None else tuple(f"GV{j + 1}" for j in range(arr.shape[1]))
        return cls(arr, names)


def check_order(order: Sequence[int], k: int) -> tuple[int, ...]:
    order = tuple(int(x) for x in order)
    if sorted(order) != list(range(k)):
        raise ValueError(f"{order} is not a permutation of 0..{k - 1}")
    return order


def compute_ebm(g: PropertyGraph, c: ViewCollectionDef | BoundCollection, partitions: int = 1,
                threads: int = 1) -> EdgeBooleanMatrix:
    """Evaluate every view predicate on every edge.

    Edge-ID ranges are evaluated independently and merged in order, so the
    result does not depend on ``partitions`` or ``threads``.
    """
    bound = c if isinstance(c, BoundCollection) else bind(c, g)
    preds = bound.predicates
    m, k = g.num_edges, len(preds)
    bits = np.zeros((m, k), dtype=bool)
    partitions = max(1, min(partitions, max(m, 1)))
    bounds = np.linspace(0, m, partitions + 1).astype(int)

    def fill(lo: int, hi: int) -> None:
        for e in g.edges[lo:hi]:
            for j, p in enumerate(preds):
                bits[e.eid, j] = p.fn(e, g)

    ranges = list(zip(bounds[:-1], bounds[1:]))
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            list(pool.map(lambda r: fill(*r), ranges))
    else:
        for lo, hi in ranges:
            fill(lo, hi)
    return EdgeBooleanMatrix(bits, bound.view_names)


def _ordered_with_zero(ebm: EdgeBooleanMatrix, order: Sequence[int]) -> np.ndarray:
    order = check_order(order, ebm.k)
    cols = np.zeros((ebm.num_rows, ebm.k + 1), dtype=np.int8)
    cols[:, 1:] = ebm.bits[:, list(order)]
    return cols


def diff_count(ebm: EdgeBooleanMatrix, order: Sequence[int]) -> int:
    """Number of membership changes along each row, starting from an implicit 0."""
    cols = _ordered_with_zero(ebm, order)
    return int(np.count_nonzero(np.diff(cols, axis=1)))


def consecutive_blocks(ebm: EdgeBooleanMatrix, order: Sequence[int]) -> int:
    """Total number of maximal runs of 1-cells over all rows."""
    cols = _ordered_with_zero(ebm, order)
    return int(np.count_nonzero(np.diff(cols, axis=1) == 1))


def row_diffs(row: Sequence[int]) -> int:
    prev, n = 0, 0
    for b in row:
        n += int(b) != prev
        prev = int(b)
    return n


def row_blocks(row: Sequence[int]) -> int:
    prev, n = 0, 0
    for b in row:
        n += prev == 0 and int(b) == 1
        prev = int(b)
    return n


@dataclass(frozen=True)
class EdgeDifferenceStream:
    """Signed per-position edge changes; ``diffs[t]`` is sorted by edge ID."""

    view_names: tuple[str, ...]
    order: tuple[int, ...]
    diffs: tuple[tuple[tuple[int, int], ...], ...]

    @property
    def k(self) -> int:
        return len(self.diffs)

    @property
    def total(self) -> int:
        return sum(len(d) for d in self.diffs)

    @property
    def ordered_names(self) -> tuple[str, ...]:
        return tuple(self.view_names[j] for j in self.order)

    def sizes(self) -> list[int]:
        return [len(d) for d in self.diffs]

    def reconstruct(self, t: int) -> frozenset[int]:
        """Edge set of the view at position ``t`` (0-based)."""
        acc: Counter = Counter()
        for d in self.diffs[: t + 1]:
            for eid, mult in d:
                acc[eid] += mult
        bad = {e: m for e, m in acc.items() if m not in (0, 1)}
        if bad:
            raise InconsistentStream(f"edges with multiplicity outside {{0,1}} at position {t}: {bad}")
        return frozenset(e for e, m in acc.items() if m == 1)


def compute_eds(ebm: EdgeBooleanMatrix, order: Sequence[int]) -> EdgeDifferenceStream:
    cols = _ordered_with_zero(ebm, order)
    steps = np.diff(cols, axis=1)  # +1 added, -1 removed, 0 unchanged
    diffs = []
    for t in range(ebm.k):
        nz = np.nonzero(steps[:, t])[0]
        diffs.append(tuple((int(e), int(steps[e, t])) for e in nz))
    return EdgeDifferenceStream(ebm.view_names, check_order(order, ebm.k), tuple(diffs))


def eds_from_edge_sets(view_edges: Sequence[Sequence[int]], view_names: Sequence[str] | None = None) -> EdgeDifferenceStream:
    """Difference stream for explicitly listed views, in the given order."""
    k = len(view_edges)
    names = tuple(view_names) if view_names else tuple(f"GV{j + 1}" for j in range(k))
    prev: set[int] = set()
    diffs = []
    for edges in view_edges:
        cur = set(edges)
        d = [(e, 1) for e in cur - prev] + [(e, -1) for e in prev - cur]
        diffs.append(tuple(sorted(d)))
        prev = cur
    return EdgeDifferenceStream(names, tuple(range(k)), tuple(diffs))


def write_eds(eds: EdgeDifferenceStream, path: str | Path, collection: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# collection: {collection}\n")
        fh.write(f"# order: {','.join(eds.ordered_names)}\n")
        fh.write(f"# total: {eds.total}\n")
        fh.write("position,edge_id,multiplicity\n")
        for t, d in enumerate(eds.diffs):
            for eid, mult in d:
                fh.write(f"{t},{eid},{mult}\n")


def read_eds(path: str | Path, view_names: Sequence[str]) -> EdgeDifferenceStream:
    """Inverse of :func:`write_eds`; ``view_names`` are in definition order."""
    meta: dict[str, str] = {}
    rows: list[tuple[int, int, int]] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("#"):
                key, _, val = line[1:].partition(":")
                meta[key.strip()] = val.strip()
            elif line and not line.startswith("position"):
                t, e, m = line.split(",")
                rows.append((int(t), int(e), int(m)))
    names = list(view_names)
    ordered = meta["order"].split(",") if meta.get("order") else []
    order = tuple(names.index(n) for n in ordered)
    diffs: list[list[tuple[int, int]]] = [[] for _ in order]
    for t, e, m in rows:
        diffs[t].append((e, m))
    eds = EdgeDifferenceStream(tuple(names), order, tuple(tuple(sorted(d)) for d in diffs))
    if "total" in meta and int(meta["total"]) != eds.total:
        raise SchemaError(f"{path}: header total {meta['total']} != {eds.total} entries")
    return eds
