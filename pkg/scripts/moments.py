"""Scaled moments E[theta_N^m] of the exact distribution across N."""

import argparse

from lpp_tails.asymptotics import moment_stability


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--t", type=float, default=0.5)
    ap.add_argument("--gamma", type=float, default=1.0)
    ap.add_argument("--N", type=int, nargs="+", default=[32, 64, 128, 256])
    ap.add_argument("--m", type=int, nargs="+", default=[1, 2, 3, 4])
    args = ap.parse_args()
    for m in args.m:
        print(f"# m = {m}")
        print(moment_stability(args.t, args.gamma, args.N, m).to_csv(), end="")


if __name__ == "__main__":
    main()
