"""Baseline economy dashboard.

Runs the no-shock economy for a few seeds and prints the long-run regime:
annualized inflation, mean fragility and mean unemployment.  The monthly
series of the first seed is written as CSV.

    python scripts/baseline_dashboard.py --seeds 5 --months 600 --out out/baseline
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from mark0 import EconomyParams, ScenarioSpec
from mark0.harness import run_one
from mark0.metrics import annualized_inflation


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--months", type=int, default=600)
    ap.add_argument("--warmup", type=int, default=300)
    ap.add_argument("--n-firms", type=int, default=1000)
    ap.add_argument("--out", default="out/baseline")
    args = ap.parse_args()

    params = EconomyParams(n_firms=args.n_firms)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for seed in range(args.seeds):
        s = run_one(params, ScenarioSpec(), seed, args.warmup, args.months)
        if seed == 0:
            (out / "dashboard_seed0.csv").write_text(s.to_csv(), encoding="utf-8")
        rows.append((annualized_inflation(s.pi), s.avg_phi.mean(), s.u.mean(), s.bankruptcies.sum()))
        print(f"seed {seed}: inflation {100 * rows[-1][0]:.2f}%/yr  <Phi> {rows[-1][1]:.3f}  "
              f"u {100 * rows[-1][2]:.2f}%  defaults {int(rows[-1][3])}")
    med = np.median(np.array(rows), axis=0)
    print(f"median: inflation {100 * med[0]:.2f}%/yr  <Phi> {med[1]:.3f}  u {100 * med[2]:.2f}%")


if __name__ == "__main__":
    main()
