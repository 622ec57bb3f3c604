"""Crisis-probability phase diagram over consumption and productivity drops.

Each cell is an ensemble of shocked runs compared with no-shock twins; the
crisis probability is the fraction of L-shaped recoveries.  Results go to
``phase_diagram.csv`` in the output directory and an ASCII map is printed.
Interrupted sweeps continue with ``--resume``.

    python scripts/phase_diagram.py --length 9 --policy none --runs 20
    python scripts/phase_diagram.py --length 3 --dzeta 0 --runs 100
"""

from __future__ import annotations

import argparse

import numpy as np

from mark0 import EconomyParams, PolicySpec
from mark0.harness import RunConfig, SweepGrid, sweep


def _axis(text: str) -> tuple[float, ...]:
    lo, hi, step = (float(x) for x in text.split(":"))
    return tuple(np.round(np.arange(lo, hi + step / 2, step), 6))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--length", type=int, default=9, help="lockdown length in months")
    ap.add_argument("--dc", default="0.1:0.7:0.05", help="lo:hi:step")
    ap.add_argument("--dzeta", default="0.0:0.5:0.1", help="lo:hi:step, or a single value")
    ap.add_argument("--policy", default="none", choices=["none", "naive", "adaptive"])
    ap.add_argument("--runs", type=int, default=20)
    ap.add_argument("--n-firms", type=int, default=1000)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default=None)
    ap.add_argument("--resume", action="store_true")
    args = ap.parse_args()

    dz = _axis(args.dzeta) if ":" in args.dzeta else (float(args.dzeta),)
    grid = SweepGrid(_axis(args.dc), dz, args.length, args.runs, 0, PolicySpec(credit_mode=args.policy))
    out = args.out or f"out/phase_T{args.length}_{args.policy}"
    diagram = sweep(grid, EconomyParams(n_firms=args.n_firms), RunConfig(), out, args.resume, args.workers)

    print(f"crisis probability, T={args.length}, credit={args.policy}  (rows dzeta, columns dc)")
    print("dz\\dc " + " ".join(f"{x:5.2f}" for x in grid.dc_values))
    for z in reversed(grid.dzeta_values):
        print(f"{z:5.2f} " + " ".join(f"{diagram.cell(c, z).p_L:5.2f}" for c in grid.dc_values))
    print(f"written to {out}/phase_diagram.csv")


if __name__ == "__main__":
    main()
