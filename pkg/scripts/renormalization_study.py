"""Renormalized norms, localized transport and the mollifier commutator defect."""

import argparse

import numpy as np

from kinavg.harness import mollifier_commutator_defect, verify_renormalization_convergence
from kinavg.spectral_core import make_grid


def _bump(z):
    inside = np.abs(z) < 1
    return np.where(inside, np.exp(-1.0 / np.where(inside, 1 - z * z, 1.0)), 0.0)


def _format(row):
    return ", ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}" for k, v in row.items())


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=256)
    parser.add_argument("--half-width", type=float, default=12.0)
    parser.add_argument("--velocity-radius", type=float, default=3.0)
    args = parser.parse_args()

    g = make_grid(1, args.points, args.points, args.half_width, args.half_width)
    rep = verify_renormalization_convergence(g.sample(lambda xs, vs: np.exp(-xs[0] ** 2 - vs[0] ** 2)),
                                             velocity_radius=args.velocity_radius)
    print("renormalization:", "pass" if rep.passed else "fail")
    for row in rep.rows:
        print("  ", _format(row))
    defect = mollifier_commutator_defect(g.sample(lambda xs, vs: _bump(xs[0] / 3) * _bump(vs[0] / 3)))
    print("mollifier defect:", "pass" if defect.passed else "fail")
    for row in defect.rows:
        print("  ", _format(row))


if __name__ == "__main__":
    main()
