"""Materialize the four-view call collection over a 200-edge graph and compare orderings."""
from __future__ import annotations

import argparse
import random

from viewgraph.generators import timestamped_graph
from viewgraph.materialize import diff_count
from viewgraph.ordering import brute_force_order, hamming_clique
from viewgraph.pipeline import materialize_collection

GVDL = """create view collection call-analysis on Calls
    [GV1: ID < 100],
    [GV2: ID >= 50 and ID < 200],
    [GV3: ID >= 10 and ID < 100],
    [GV4: ID >= 60 and ID < 200]
"""


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--random-orders", type=int, default=5)
    args = ap.parse_args()
    g = timestamped_graph(20, 200, seed=0)
    mc = materialize_collection(g, GVDL)
    ebm = mc.ebm
    patterns = sorted({ebm.row(e) for e in range(ebm.num_rows)}, reverse=True)
    print("row patterns:", ", ".join("".join(map(str, p)) for p in patterns))
    print("hamming clique (0 = empty view):")
    for row in hamming_clique(ebm).weight.tolist():
        print("  ", " ".join(f"{x:4d}" for x in row))
    rng = random.Random(0)
    print(f"default   ds = {diff_count(ebm, range(4))}")
    print(f"optimized ds = {mc.num_diffs}  order {','.join(mc.eds.ordered_names)}")
    print(f"optimal   ds = {diff_count(ebm, brute_force_order(ebm))}")
    for i in range(args.random_orders):
        order = rng.sample(range(4), 4)
        print(f"random {i}  ds = {diff_count(ebm, order)}  order {order}")


if __name__ == "__main__":
    main()
