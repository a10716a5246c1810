"""Marcinkiewicz and Hormander bounds of a symbol under scan-domain doubling."""

import argparse

from kinavg.symbols import ScanGrid, gaussian_symbol, hormander_bound, marcinkiewicz_bound, truncation_symbol


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--symbol", default="truncation", choices=("truncation", "gaussian"))
    parser.add_argument("--alpha-plus-beta", type=float, default=-0.5)
    parser.add_argument("--s", type=float, default=1.0)
    parser.add_argument("--radius", type=float, default=16.0)
    parser.add_argument("--doublings", type=int, default=3)
    args = parser.parse_args()

    sym = truncation_symbol(args.alpha_plus_beta, args.s) if args.symbol == "truncation" else gaussian_symbol(1)
    grid = ScanGrid(2, radius=args.radius)
    last = None
    print(f"{'radius':>8} {'marcinkiewicz':>14} {'hormander':>12} {'growth':>8}")
    for _ in range(args.doublings + 1):
        m, h = marcinkiewicz_bound(sym, grid), hormander_bound(sym, grid)
        growth = "" if last is None else f"{h / last:8.3f}"
        print(f"{grid.radius:>8.1f} {m:>14.6g} {h:>12.6g} {growth:>8}")
        last, grid = h, grid.doubled()


if __name__ == "__main__":
    main()
