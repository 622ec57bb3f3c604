"""Compare credit and helicopter policies on one lockdown.

For each policy the script reports the recovery-shape fractions and the
mean peak unemployment during and after the lockdown, and writes the
ensemble-median relative output per month to ``relative_output.csv``.

    python scripts/policy_dashboards.py --dc 0.3 --dzeta 0.5 --length 9 --runs 20
"""

from __future__ import annotations

import argparse
import csv
from pathlib import Path

import numpy as np

from mark0 import EconomyParams, PolicySpec, ScenarioSpec, ShockSchedule
from mark0.harness import RunConfig, WarmCache, run_ensemble
from mark0.metrics import relative_output

POLICIES = {
    "none": PolicySpec(credit_mode="none"),
    "naive": PolicySpec(credit_mode="naive"),
    "naive+helicopter": PolicySpec(credit_mode="naive", helicopter_kappa=2.0),
    "adaptive": PolicySpec(credit_mode="adaptive"),
    "adaptive+helicopter": PolicySpec(credit_mode="adaptive", helicopter_kappa=2.0),
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dc", type=float, default=0.3)
    ap.add_argument("--dzeta", type=float, default=0.5)
    ap.add_argument("--length", type=int, default=9)
    ap.add_argument("--runs", type=int, default=20)
    ap.add_argument("--n-firms", type=int, default=1000)
    ap.add_argument("--out", default="out/policies")
    args = ap.parse_args()

    params = EconomyParams(n_firms=args.n_firms)
    cfg = RunConfig()
    cache = WarmCache(params, cfg)
    shock = ShockSchedule.single(args.dc, args.dzeta, args.length)
    seeds = list(range(args.runs))
    medians = {}
    print(f"{'policy':<22}{'V':>6}{'U':>6}{'W':>6}{'L':>6}{'peak u in':>11}{'peak u after':>14}")
    for name, pol in POLICIES.items():
        res = run_ensemble(params, ScenarioSpec(shock, pol), seeds, cfg, keep_series=True, cache=cache)
        f = res.fractions
        print(f"{name:<22}" + "".join(f"{f[k]:6.2f}" for k in "VUWL")
              + f"{100 * res.peak_u_during_mean:10.1f}%{100 * res.peak_u_after_mean:13.1f}%")
        rel = np.array([relative_output(run, twin) for run, twin in res.series.values()])
        medians[name] = np.median(rel, axis=0)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "relative_output.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["t", *medians])
        for t, row in enumerate(zip(*medians.values())):
            w.writerow([t, *(repr(float(x)) for x in row)])
    print(f"written to {out}/relative_output.csv")


if __name__ == "__main__":
    main()
