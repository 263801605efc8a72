"""Optimized vs random view orders on community-removal collections; writes a CSV."""
from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import asdict

from viewgraph.experiments import OrderingBenefitConfig, ordering_benefit


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=54)
    ap.add_argument("--random-orders", type=int, default=5)
    ap.add_argument("--out", help="CSV path (default stdout)")
    args = ap.parse_args()
    rows = ordering_benefit(OrderingBenefitConfig(seeds=args.seeds, random_orders=args.random_orders))
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(list(asdict(rows[0])) + ["win", "factor_vs_default"])
    for r in rows:
        w.writerow(list(asdict(r).values()) + [int(r.win), f"{r.default / max(1, r.optimized):.3f}"])
    if args.out:
        fh.close()
    wins = sum(r.win for r in rows)
    print(f"wins {wins}/{len(rows)} ({wins / len(rows):.1%})", file=sys.stderr)


if __name__ == "__main__":
    main()
