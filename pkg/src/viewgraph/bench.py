"""Benchmark harness: run an analytics program over a materialized collection."""
from __future__ import annotations

import json
import statistics
import time
from dataclasses import asdict, dataclass, field
from typing import Iterable

from .analytics import AnalyticsSpec, build_dataflow, edge_deltas
from .engine import OutputDiffStream
from .pipeline import MaterializedCollection
from .splitting import RunLog, run_adaptive
from .store import PropertyGraph


@dataclass
class BenchReport:
    mode: str
    algorithm: str
    per_view_seconds: list[float]
    per_view_work: list[int]
    num_diffs: int
    cct_seconds: float
    ordering_seconds: float
    decisions: list[str] = field(default_factory=list)
    repeat: int = 1

    @property
    def total_seconds(self) -> float:
        return sum(self.per_view_seconds)

    @property
    def total_work(self) -> int:
        return sum(self.per_view_work)

    def to_json(self) -> str:
        d = asdict(self)
        d["total_seconds"] = self.total_seconds
        d["total_work"] = self.total_work
        return json.dumps(d, indent=2)

    def summary(self) -> str:
        return (f"{self.algorithm} mode={self.mode} views={len(self.per_view_seconds)} "
                f"total={self.total_seconds * 1000:.1f} ms work={self.total_work} "
                f"#diffs = {self.num_diffs} CCT = {self.cct_seconds * 1000:.1f} ms")


def run_benchmark(g: PropertyGraph, mc: MaterializedCollection, spec: AnalyticsSpec, mode: str = "diff",
                  batch: int = 10, repeat: int = 1, time_proxy: str = "wall", nodes: Iterable[int] = ()
                  ) -> tuple[OutputDiffStream, RunLog, BenchReport]:
    """Run ``repeat`` times; per-view times are medians, outputs come from the last run."""
    deltas = edge_deltas(g, mc.eds, spec)
    df = build_dataflow(spec)
    static = {"nodes": list(nodes)}
    times: list[list[float]] = []
    out = log = None
    for _ in range(max(1, repeat)):
        out, log = run_adaptive(df, deltas, batch=batch, mode=mode, time_proxy=time_proxy,
                                inputs=static)
        times.append([r.time for r in log.rows])
    per_view = [statistics.median(col) for col in zip(*times)] if times and times[0] else []
    report = BenchReport(mode, spec.algorithm, per_view, list(out.work), mc.num_diffs, mc.seconds,
                         mc.ordering.seconds, log.decisions, max(1, repeat))
    return out, log, report


def timed(fn, *args, **kw):
    t0 = time.perf_counter()
    res = fn(*args, **kw)
    return res, time.perf_counter() - t0
