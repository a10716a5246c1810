"""Ratio growth for oscillatory data when the regularity index is pushed past its limit."""

import argparse

from kinavg.harness import sharpness_probe


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--frequencies", default="4,8,16,32")
    parser.add_argument("--sigma", type=float, default=1.0)
    args = parser.parse_args()
    freqs = tuple(float(x) for x in args.frequencies.split(","))
    rep = sharpness_probe(freqs, args.sigma)
    for row in rep.rows:
        print(", ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}" for k, v in row.items()))
    for key, value in rep.quantities.items():
        print(f"{key}: {value}")


if __name__ == "__main__":
    main()
