"""Energy identity gap under refinement at fixed cell size."""

import argparse

import numpy as np

from kinavg.harness import verify_energy_identity
from kinavg.spectral_core import make_grid


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--levels", default="128,256,512,1024")
    parser.add_argument("--base-half-width", type=float, default=6.0, help="box half-width at 128 points")
    parser.add_argument("--mode", default=None, choices=(None, "padded", "line"))
    args = parser.parse_args()

    previous = None
    print(f"{'points':>7} {'L':>6} {'lhs':>12} {'rhs':>12} {'rel.gap':>10} {'order':>6}")
    for points in (int(x) for x in args.levels.split(",")):
        half = args.base_half_width * points / 128
        g = make_grid(1, points, points, half, half)
        rep = verify_energy_identity(g.sample(lambda xs, vs: np.exp(-xs[0] ** 2 - vs[0] ** 2)), mode=args.mode)
        q = rep.quantities
        order = "" if previous is None else f"{np.log2(previous / q['relative_gap']):6.2f}"
        print(f"{points:>7} {half:>6.1f} {q['lhs']:>12.8f} {q['rhs']:>12.8f} {q['relative_gap']:>10.3e} {order:>6}")
        previous = q["relative_gap"]


if __name__ == "__main__":
    main()
