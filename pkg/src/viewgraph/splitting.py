"""Adaptive choice between differential and from-scratch execution per view.

Two linear cost models are fitted online: scratch time against view size and
differential time against difference-set size. Running a view from scratch
starts a fresh engine epoch, splitting the collection in two.
"""
from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .engine import Dataflow, Execution, OutputDiffStream, add_into, as_delta, DEFAULT_ITERATION_CAP
from .errors import ColdModel

DIFF, SCRATCH = "differential", "scratch"
MODES = (DIFF, SCRATCH)


@dataclass
class LinearFit:
    slope: float = 0.0
    intercept: float = 0.0

    def __call__(self, size: float) -> float:
        return max(0.0, self.slope * size + self.intercept)


def fit_line(points: Sequence[tuple[float, float]]) -> LinearFit:
    """Least squares with intercept.

    One point (or no spread in sizes) gives a line through the origin and the
    mean point. A negative slope is flattened to the mean so predictions never
    fall as the input grows.
    """
    if not points:
        raise ColdModel("no observations")
    xs = np.array([p[0] for p in points], dtype=float)
    ys = np.array([p[1] for p in points], dtype=float)
    if np.ptp(xs) == 0:
        x, y = xs.mean(), ys.mean()
        return LinearFit(y / x, 0.0) if x > 0 else LinearFit(0.0, y)
    slope, intercept = np.polyfit(xs, ys, 1)
    if slope < 0:
        return LinearFit(0.0, float(ys.mean()))
    return LinearFit(float(slope), float(intercept))


@dataclass
class CostModel:
    scratch: list[tuple[float, float]] = field(default_factory=list)
    differential: list[tuple[float, float]] = field(default_factory=list)

    def record(self, mode: str, size: float, seconds: float) -> "CostModel":
        if size < 0 or seconds < 0:
            raise ValueError("size and time must be non-negative")
        (self.scratch if mode == SCRATCH else self.differential).append((float(size), float(seconds)))
        return self

    def fit(self, mode: str) -> LinearFit:
        pts = self.scratch if mode == SCRATCH else self.differential
        if not pts:
            raise ColdModel(f"no {mode} observations yet")
        return fit_line(pts)

    def predict(self, mode: str, size: float) -> float:
        return self.fit(mode)(size)

    def frozen(self) -> "CostModel":
        return CostModel(list(self.scratch), list(self.differential))


def decide(model: CostModel, view_size: float, diff_size: float) -> str:
    """Cheaper predicted mode; ties go to differential."""
    st = model.predict(SCRATCH, view_size)
    dt = model.predict(DIFF, diff_size)
    return SCRATCH if st < dt else DIFF


@dataclass
class SplitPlan:
    decisions: list[str]
    batch: int = 10

    def __post_init__(self):
        for i, d in enumerate(self.decisions):
            if d not in MODES:
                raise ValueError(f"decision {i} is {d!r}; expected one of {MODES}")

    @property
    def splits(self) -> list[int]:
        """Views (after the first) that were run from scratch."""
        return [i for i, d in enumerate(self.decisions) if i > 0 and d == SCRATCH]


@dataclass(frozen=True)
class LogRow:
    view: int
    decision: str
    size: int
    time: float
    work: int


@dataclass
class RunLog:
    rows: list[LogRow] = field(default_factory=list)

    def append(self, row: LogRow) -> None:
        self.rows.append(row)

    @property
    def decisions(self) -> list[str]:
        return [r.decision for r in self.rows]

    @property
    def total_work(self) -> int:
        return sum(r.work for r in self.rows)

    @property
    def total_time(self) -> float:
        return sum(r.time for r in self.rows)

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["view", "decision", "size", "time", "work"])
            for r in self.rows:
                w.writerow([r.view, r.decision, r.size, f"{r.time:.6f}", r.work])


def _subtract(new: dict, old: dict) -> dict:
    out = dict(new)
    for r, m in old.items():
        add_into(out, r, -m)
    return out


def run_adaptive(
    df: Dataflow,
    edge_deltas: Sequence,
    batch: int = 10,
    mode: str = "adaptive",
    plan: Sequence[str] | None = None,
    time_proxy: str = "wall",
    inputs: Mapping[str, object] | None = None,
    output: str = "out",
    iteration_cap: int = DEFAULT_ITERATION_CAP,
) -> tuple[OutputDiffStream, RunLog]:
    """Run a collection view by view, choosing differential or scratch per view.

    ``mode`` is ``diff``, ``scratch`` or ``adaptive``; ``plan`` forces the
    decisions. Adaptive mode runs the first view from scratch and the second
    differentially, then decides each view with models refreshed every
    ``batch`` views. ``time_proxy="work"`` uses the engine's work counter in
    place of wall time.
    """
    if mode not in ("diff", "scratch", "adaptive"):
        raise ValueError(f"unknown mode {mode!r}")
    if time_proxy not in ("wall", "work"):
        raise ValueError(f"unknown time proxy {time_proxy!r}")
    k = len(edge_deltas)
    if plan is not None and len(plan) != k:
        raise ValueError(f"plan has {len(plan)} decisions for {k} views")
    batch = max(1, batch)

    model = CostModel()
    frozen: CostModel | None = None
    log = RunLog()
    deltas, work = [], []
    view: dict = {}
    result: dict = {}
    ex: Execution | None = None

    for t, raw in enumerate(edge_deltas):
        d = as_delta(raw)
        for r, m in d.items():
            add_into(view, r, m)
        view_size = sum(view.values())
        diff_size = len(d)

        if t == 0:
            choice = SCRATCH
        elif plan is not None:
            choice = plan[t]
        elif mode == "diff":
            choice = DIFF
        elif mode == "scratch":
            choice = SCRATCH
        elif t == 1:
            choice = DIFF
        else:
            if frozen is None or (t - 2) % batch == 0:
                frozen = model.frozen()
            choice = decide(frozen, view_size, diff_size)

        t0 = time.perf_counter()
        if choice == SCRATCH:
            ex = Execution(df, iteration_cap)
            feed = dict(inputs or {})
            feed["edges"] = dict(view)
            fresh = ex.step(feed)[output]
            out = _subtract(fresh, result)
            size = view_size
        else:
            out = ex.step({"edges": d})[output]
            size = diff_size
        elapsed = time.perf_counter() - t0
        w = ex.work[-1]
        for r, m in out.items():
            add_into(result, r, m)
        model.record(choice, size, w if time_proxy == "work" else elapsed)
        deltas.append(out)
        work.append(w)
        log.append(LogRow(t, choice, size, elapsed, w))

    return OutputDiffStream(deltas, work), log
