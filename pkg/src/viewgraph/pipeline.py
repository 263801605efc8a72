"""Glue from GVDL text to engine inputs: parse, bind, materialize, order."""
from __future__ import annotations

import time
from dataclasses import dataclass

from .gvdl import ViewCollectionDef, bind, parse
from .materialize import EdgeBooleanMatrix, EdgeDifferenceStream, compute_ebm, compute_eds
from .ordering import OrderingReport, choose_order
from .store import PropertyGraph


@dataclass(frozen=True)
class MaterializedCollection:
    definition: ViewCollectionDef
    ebm: EdgeBooleanMatrix
    eds: EdgeDifferenceStream
    ordering: OrderingReport
    seconds: float  # collection creation time, ordering included

    @property
    def num_diffs(self) -> int:
        return self.eds.total


def materialize_collection(g: PropertyGraph, stmt: ViewCollectionDef | str, ordering: str = "optimized",
                           partitions: int = 1, threads: int = 1) -> MaterializedCollection:
    if isinstance(stmt, str):
        stmt = parse(stmt)
    if not isinstance(stmt, ViewCollectionDef):
        raise TypeError(f"expected a view collection, got {type(stmt).__name__}")
    t0 = time.perf_counter()
    ebm = compute_ebm(g, bind(stmt, g), partitions, threads)
    report = choose_order(ebm, ordering, partitions)
    eds = compute_eds(ebm, report.order)
    return MaterializedCollection(stmt, ebm, eds, report, time.perf_counter() - t0)
