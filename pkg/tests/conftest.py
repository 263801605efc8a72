from __future__ import annotations

import random

import pytest

from viewgraph.data import CALLS_EDGES, CALLS_NODES
from viewgraph.store import from_records, load_graph

# Four overlapping ID ranges over 200 edges; rows fall into five membership patterns.
FOUR_VIEW_GVDL = """create view collection call-analysis on Calls
    [GV1: ID < 100],
    [GV2: ID >= 50 and ID < 200],
    [GV3: ID >= 10 and ID < 100],
    [GV4: ID >= 60 and ID < 200]
"""

RANGE_COLLECTION_GVDL = """create view collection call-analysis on Calls
    [GV1: ID < 100],
    [GV2: ID ≥ 50 and ID < 199],
    [GV3: ID ≥ 10 and ID < 100],
    [GV4: ID ≥ 60 and ID < 199]
"""


def line_graph(m: int, n: int = 20, seed: int = 0):
    rng = random.Random(seed)
    nodes = [{"city": rng.choice(["LA", "NY"])} for _ in range(n)]
    edges = [(rng.randrange(n), rng.randrange(n), {"duration": rng.randint(1, 40), "year": 2019})
             for _ in range(m)]
    return from_records(nodes, edges)


@pytest.fixture(scope="session")
def calls():
    return load_graph(CALLS_NODES, CALLS_EDGES)


@pytest.fixture(scope="session")
def graph200():
    return line_graph(200)


def random_views(rng: random.Random, n: int, k: int, m: int | None = None, weighted: bool = True):
    """k random edge multisets over a shared pool, drifting from view to view."""
    m = m if m is not None else 2 * n
    pool = [(rng.randrange(n), rng.randrange(n), rng.randint(1, 9) if weighted else 1) for _ in range(m)]
    cur = set(rng.sample(range(m), m // 2)) if m else set()
    views = []
    for _ in range(k):
        for i in rng.sample(range(m), max(1, m // 8)) if m else []:
            cur ^= {i}
        views.append(sorted(cur))
    return pool, views


def view_deltas(pool, views):
    out, prev = [], set()
    for v in views:
        cur = set(v)
        d: dict = {}
        for i in cur - prev:
            d[pool[i]] = d.get(pool[i], 0) + 1
        for i in prev - cur:
            d[pool[i]] = d.get(pool[i], 0) - 1
        out.append({r: c for r, c in d.items() if c})
        prev = cur
    return out


def view_edges(pool, view):
    return [pool[i] for i in view]


ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
