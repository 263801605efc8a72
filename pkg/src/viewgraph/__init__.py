"""Analytics over collections of filtered graph views with differential computation."""
from __future__ import annotations

from .aggregate import SummaryGraph, materialize_aggregate
from .analytics import AnalyticsSpec, build_dataflow, scratch_oracle
from .engine import Dataflow, Execution, OutputDiffStream, accumulate, run_on_collection, run_on_view
from .gvdl import bind, parse, parse_script
from .materialize import (EdgeBooleanMatrix, EdgeDifferenceStream, compute_ebm, compute_eds, consecutive_blocks,
                          diff_count)
from .ordering import brute_force_order, christofides_order, hamming_clique, optimize_order
from .pipeline import materialize_collection
from .splitting import CostModel, RunLog, SplitPlan, decide, run_adaptive
from .store import PropertyGraph, load_graph

__all__ = [
    "AnalyticsSpec", "CostModel", "Dataflow", "EdgeBooleanMatrix", "EdgeDifferenceStream", "Execution",
    "OutputDiffStream", "PropertyGraph", "RunLog", "SplitPlan", "SummaryGraph", "accumulate", "bind",
    "brute_force_order", "build_dataflow", "christofides_order", "compute_ebm", "compute_eds",
    "consecutive_blocks", "decide", "diff_count", "hamming_clique", "load_graph", "materialize_aggregate",
    "materialize_collection", "optimize_order", "parse", "parse_script", "run_adaptive", "run_on_collection",
    "run_on_view", "scratch_oracle",
]
