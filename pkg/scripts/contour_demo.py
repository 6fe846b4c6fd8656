"""Trace Gamma_1, Gamma_2 and all critical trajectories at t=1/sqrt(2), gamma=2, a=4.

Writes one CSV per path plus a JSON summary to the output directory.
"""

import argparse
import json
import math
from pathlib import Path

from lpp_tails.core import ModelParams
from lpp_tails.endpoint import solve_endpoint
from lpp_tails.gfunction import check_scalar_rhp, make_context
from lpp_tails.quaddiff import real_period_residual, write_paths_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--t", type=float, default=1 / math.sqrt(2))
    ap.add_argument("--gamma", type=float, default=2.0)
    ap.add_argument("--a", type=float, default=4.0)
    ap.add_argument("--out", type=Path, default=Path("out/contours"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    ep = solve_endpoint(args.a, ModelParams(args.t, args.gamma))
    ctx = make_context(ep)
    cs = ctx.contours
    named = [(f"trajectory_{i}", p) for i, p in enumerate(cs.trajectories)]
    named += [(f"orthogonal_{i}", p) for i, p in enumerate(cs.orthogonals)]
    named += [("gamma1_upper", cs.gamma1), ("gamma2_upper", cs.gamma2)]
    files = write_paths_csv(named, args.out)

    rep = check_scalar_rhp(ctx)
    summary = {
        "xi": [ep.xi.real, ep.xi.imag], "z0": ep.z0, "p_i": cs.p_i,
        "z0_miss": cs.z0_miss, "topology": cs.topology(),
        "real_period_mid": real_period_residual(ep, -0.5 * (args.t + 1 / args.t)),
        "delta": ctx.delta,
        "rhp": {r.property: float(r.max_residual) for r in rep.residuals},
        "files": files,
    }
    (args.out / "summary.json").write_text(json.dumps(summary, indent=2))
    for k in ("p_i", "z0_miss", "topology", "delta"):
        print(f"{k:10s} {summary[k]}")


if __name__ == "__main__":
    main()
