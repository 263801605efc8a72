"""Differential outputs vs scratch oracles on random five-view collections."""
from __future__ import annotations

import argparse

from viewgraph.experiments import EquivalenceConfig, scratch_equivalence


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=100)
    ap.add_argument("--max-nodes", type=int, default=200)
    ap.add_argument("--views", type=int, default=5)
    args = ap.parse_args()
    res = scratch_equivalence(EquivalenceConfig(args.seeds, args.max_nodes, args.views))
    print(f"checked {res.checked} views in {res.seconds:.1f}s, {len(res.mismatches)} mismatches")
    for alg, seed, view in res.mismatches[:20]:
        print(f"  {alg} seed={seed} view={view}")


if __name__ == "__main__":
    main()
