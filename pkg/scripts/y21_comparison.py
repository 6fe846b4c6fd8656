"""Exact log(-Y21(0;k)) against k*Delta + log sin(theta_c/2) at fixed a = N/k."""

import argparse

from lpp_tails.asymptotics import compare_y21
from lpp_tails.core import grid_rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--t", type=float, default=0.5)
    ap.add_argument("--gamma", type=float, default=1.0)
    ap.add_argument("--a", type=float, nargs="+", default=[0.55, 0.6, 0.7])
    ap.add_argument("--k", type=int, nargs="+", default=[50, 100, 200, 400])
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    args = ap.parse_args()

    for a in args.a:
        for k in args.k:
            N = round(a * k)
            rep = compare_y21(args.t, args.gamma, grid_rows(args.gamma, N), N, [k])
            text = rep.to_csv() if args.format == "csv" else rep.to_json()
            print(text.strip() if k == args.k[0] else text.strip().splitlines()[-1])


if __name__ == "__main__":
    main()
