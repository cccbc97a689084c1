"""How the fitted exponents and prefactors move as the fit window changes."""

import argparse

from qmoment.psf import TransferModel
from qmoment.sweep import SweepConfig, coefficients, default_grid


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--model", choices=("gaussian", "rect"), default="gaussian")
    ap.add_argument("--points", type=int, default=20)
    ap.add_argument("--upper", type=float, nargs="+", default=[0.3, 0.5, 0.8, 1.0, 1.5])
    args = ap.parse_args()

    model = TransferModel(args.model)
    print("window        mu    H0        E0      ratio    H1     E1")
    for hi in args.upper:
        cfg = SweepConfig(model=model, deltas=default_grid(0.1, hi, args.points))
        for r in coefficients(cfg):
            print(f"[0.1, {hi:<4}]  {r.mu}  {r.H0:8.3g}  {r.E0:8.3g}  {r.ratio:6.3f}  "
                  f"{r.H1:5.2f}  {r.E1:5.2f}")


if __name__ == "__main__":
    main()
