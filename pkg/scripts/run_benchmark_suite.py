"""Full simulation-protocol driver.

Runs every algorithm on every benchmark environment at both cost
settings with common random seeds and writes per-episode and summary
CSVs. At the published scale (5000 instances) the PO-UCT cells dominate
the runtime; start with --instances 500 for a desk-scale pass.

Usage:
    python scripts/run_benchmark_suite.py --instances 500 --out results/
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from metaplan.harness import BenchmarkSpec, run_benchmark


def parse_args():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--instances", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--precision", type=float, default=0.005)
    p.add_argument("--w-cost", type=float, default=0.5)
    p.add_argument("--goals", type=int, nargs="+", default=[2, 3, 4, 5])
    p.add_argument(
        "--algos",
        nargs="+",
        default=["mgpo", "metagreedy", "pouct:10", "pouct:100", "pouct:1000"],
    )
    p.add_argument("--costs", type=float, nargs="+", default=[0.05, 1.0])
    p.add_argument("--timing", action="store_true")
    p.add_argument("--out", type=str, required=True)
    return p.parse_args()


def main() -> None:
    args = parse_args()
    spec = BenchmarkSpec(
        algorithms=tuple(args.algos),
        goal_counts=tuple(args.goals),
        costs=tuple(args.costs),
        tau_obs=args.precision,
        n_instances=args.instances,
        base_seed=args.seed,
        out_dir=args.out,
        measure_time=args.timing,
        w_cost=args.w_cost,
    )
    result = run_benchmark(spec)
    width = max(len(c.algo) for c in result.cells)
    for cell in result.cells:
        print(
            f"{cell.algo:<{width}}  {cell.env}  cost={cell.cost:<5g} "
            f"mean={cell.mean_rr:9.2f}  median={cell.median_rr:9.2f}  "
            f"iqr={cell.iqr_rr:8.2f}"
            + (f"  {cell.mean_ms_per_decision:8.2f} ms/dec" if args.timing else "")
        )


if __name__ == "__main__":
    main()
