"""Pure differential, pure scratch and adaptive work on an author-year collection."""
from __future__ import annotations

import argparse

from viewgraph.experiments import splitting_experiment
from viewgraph.generators import author_year_windows, timestamped_graph


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nodes", type=int, default=200)
    ap.add_argument("--edges", type=int, default=3000)
    ap.add_argument("--year-window", type=int, default=5)
    ap.add_argument("--rank-steps", type=int, default=5)
    ap.add_argument("--batch", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--all-nodes", action="store_true", help="feed every graph node as a static input")
    args = ap.parse_args()
    g = timestamped_graph(args.nodes, args.edges, 2000, 2019, seed=args.seed)
    wl = author_year_windows(g, 2000, 2020, args.year_window, args.rank_steps)
    print(f"slide boundaries: {list(wl.boundaries)}")
    print(f"{'alg':<5} {'diff':>8} {'scratch':>8} {'adaptive':>8}  decisions")
    for r in splitting_experiment(wl, batch=args.batch, all_nodes=args.all_nodes):
        marks = "".join("S" if i in r.splits or i == 0 else "D" for i in range(len(r.decisions)))
        print(f"{r.algorithm:<5} {r.work_diff:>8} {r.work_scratch:>8} {r.work_adaptive:>8}  {marks}")


if __name__ == "__main__":
    main()
