"""Bundled example inputs."""
from __future__ import annotations

from pathlib import Path

DATA_DIR = Path(__file__).parent
CALLS_NODES = DATA_DIR / "calls_nodes.csv"
CALLS_EDGES = DATA_DIR / "calls_edges.csv"
