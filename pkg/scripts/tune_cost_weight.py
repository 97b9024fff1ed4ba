"""Tune the MGPO cost weight for a benchmark environment.

Runs the sequential model-based optimizer (default 50 evaluations) on a
fixed set of training instances and reports the best weight, which can
then be passed to `bench run --w-cost`.

Usage:
    python scripts/tune_cost_weight.py --env g2 --cost 1.0
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from metaplan.harness import env_by_name
from metaplan.mgpo import VocConfig, tune_cost_weight


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--env", default="g2")
    p.add_argument("--cost", type=float, default=1.0)
    p.add_argument("--precision", type=float, default=0.005)
    p.add_argument("--budget", type=int, default=50)
    p.add_argument("--train-instances", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    template = env_by_name(args.env)
    base = VocConfig(cost=args.cost, tau_obs=args.precision)
    w = tune_cost_weight(
        template,
        base,
        budget=args.budget,
        n_eval_instances=args.train_instances,
        seed=args.seed,
    )
    print(f"tuned w_cost for {args.env} at cost {args.cost}: {w:.4f}")


if __name__ == "__main__":
    main()
