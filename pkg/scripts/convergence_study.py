"""Bound convergence in the truncation sizes (p, q) and the quadrature order."""

import argparse

from qmoment.helstrom import bound_from_pad
from qmoment.operators import MomentSpec, ObjectModel, assemble, u_vector
from qmoment.psf import TransferModel


def bound(model, delta, mu, p, q, order):
    obj = ObjectModel(delta)
    pad, ortho = assemble(model, obj, p, q, order=order)
    return bound_from_pad(pad, u_vector(obj, ortho, MomentSpec(mu), model, order=order)).bound


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--model", choices=("gaussian", "rect"), default="rect")
    ap.add_argument("--delta", type=float, default=0.3)
    ap.add_argument("--mu", type=int, default=6)
    args = ap.parse_args()

    model = TransferModel(args.model)
    ref = bound(model, args.delta, args.mu, 16, 12, 120)
    print(f"reference (p=16, q=12, order=120): {ref:.12e}")
    print("  p   q  order   bound              rel. to reference")
    for p, q in [(8, 4), (8, 6), (10, 6), (12, 8), (14, 10), (16, 12)]:
        for order in (40, 80):
            b = bound(model, args.delta, args.mu, p, q, order)
            print(f"{p:3d} {q:3d} {order:5d}   {b:.12e}  {b / ref - 1:+.2e}")


if __name__ == "__main__":
    main()
