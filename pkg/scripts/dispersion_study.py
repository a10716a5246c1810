"""Fit free-streaming decay exponents of mixed norms and compare with theory."""

import argparse
import math

import numpy as np

from kinavg.cli import parse_number
from kinavg.spectral_core import TensorField, make_grid
from kinavg.transport_dispersion import dispersion_decay_fit


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=1, choices=(1, 2, 3))
    parser.add_argument("--points-x", type=int, default=1024)
    parser.add_argument("--points-v", type=int, default=512)
    parser.add_argument("--half-width-x", type=float, default=160.0)
    parser.add_argument("--half-width-v", type=float, default=5.0)
    parser.add_argument("--pairs", default="inf:1,2:1,4:4/3", help="p:r pairs")
    parser.add_argument("--times", default="4,32,8", help="start,stop,count (geometric)")
    args = parser.parse_args()

    g = make_grid(1, args.points_x, args.points_v, args.half_width_x, args.half_width_v)
    base = g.sample(lambda xs, vs: np.exp(-xs[0] ** 2 - vs[0] ** 2))
    data = base if args.n == 1 else TensorField((base,) * args.n)
    start, stop, count = args.times.split(",")
    times = np.geomspace(float(start), float(stop), int(count))
    print(f"{'p':>6} {'r':>6} {'fitted':>10} {'theory':>8} {'rel.err':>8}")
    for item in args.pairs.split(","):
        p, r = (parse_number(x) for x in item.split(":"))
        fit = dispersion_decay_fit(data, p, r, times)
        label = "inf" if p == math.inf else f"{p:.4g}"
        print(f"{label:>6} {r:>6.4g} {fit.exponent:>10.5f} {fit.theoretical:>8.4g} {fit.relative_error:>8.2%}")


if __name__ == "__main__":
    main()
