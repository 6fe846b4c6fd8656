"""Monte Carlo CDF against the Toeplitz CDF, with binomial z-scores."""

import argparse
import math

from lpp_tails.percolation import empirical_cdf, sample_g
from lpp_tails.toeplitz import SymbolSpec, build_table


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--t", type=float, default=0.5)
    ap.add_argument("--M", type=int, default=8)
    ap.add_argument("--N", type=int, default=8)
    ap.add_argument("--count", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    batch = sample_g(args.t, args.M, args.N, args.seed, args.count)
    tab = build_table(SymbolSpec(args.t, args.M, args.N))
    print("n,exact,empirical,z")
    for n in range(int(batch.values.max()) + 1):
        p = math.exp(tab.log_cdf(n))
        e = empirical_cdf(batch, n)
        sd = math.sqrt(max(p * (1 - p), 1e-300) / args.count)
        print(f"{n},{p:.10f},{e:.10f},{(e - p) / sd:+.2f}")


if __name__ == "__main__":
    main()
