"""Regenerate both coefficient tables and print them next to the reference values."""

import argparse

from qmoment.psf import TransferModel
from qmoment.sweep import SweepConfig, coefficients, default_grid, format_table

REFERENCE = {
    "gaussian": dict(H0=(0.96, 1.0, 1.2, 2.5, 2.8, 8.9, 9.6, 36),
                     E0=(0.96, 1.0, 1.2, 2.6, 5.9, 18, 50, 200)),
    "rect": dict(H0=(0.95, 0.75, 0.91, 3.6, 4.0, 36, 38, 590),
                 E0=(0.95, 0.75, 0.94, 3.6, 8.6, 76, 220, 3400)),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--delta-min", type=float, default=0.1)
    ap.add_argument("--delta-max", type=float, default=0.8)
    ap.add_argument("--points", type=int, default=20)
    ap.add_argument("--p", type=int, default=10)
    ap.add_argument("--q", type=int, default=6)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    grid = default_grid(args.delta_min, args.delta_max, args.points)
    for kind in ("gaussian", "rect"):
        cfg = SweepConfig(model=TransferModel(kind), deltas=grid, p=args.p, q=args.q)
        table = coefficients(cfg, args.workers)
        print(f"== {kind} ==")
        print(format_table(table))
        ref = REFERENCE[kind]
        print(" mu   H0 / ref    E0 / ref")
        for r in table:
            print(f"{r.mu:3d}  {r.H0 / ref['H0'][r.mu]:8.3f}  {r.E0 / ref['E0'][r.mu]:9.3f}")
        print()


if __name__ == "__main__":
    main()
