"""Named validation checks grouped into suites.

Each check returns a :class:`CheckResult`; the CLI prints them as a table and
the test-suite asserts on them.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .asymptotics import compare_y21, moment_stability, tail_window
from .core import ModelParams, centering, scaling_constants
from .endpoint import (a0_closed_forms, endpoint_equation, endpoint_violations,
                       solve_endpoint)
from .gfunction import check_scalar_rhp, delta, delta_of_a, make_context
from .percolation import empirical_cdf, exact_cdf_small, sample_g
from .quaddiff import (TRAJECTORY, build_contours, conjugation_residual,
                       real_period_residual)
from .toeplitz import SymbolSpec, build_table, cached_table

T_GRID = (0.1, 0.3, 0.5, 0.7, 0.9)
GAMMA_GRID = (1.0, 1.5, 2.0, 4.0)
REF_T, REF_GAMMA, REF_A = 1 / math.sqrt(2), 2.0, 4.0


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return (f"[{tag}] {self.name}: value={self.value:.3e} "
                f"threshold={self.threshold:.3e} ({self.seconds:.1f}s)")


def _timed(fn):
    def run(*args, **kw):
        t0 = time.perf_counter()
        res = fn(*args, **kw)
        res.seconds = time.perf_counter() - t0
        return res
    run.__name__ = fn.__name__
    run.__doc__ = fn.__doc__
    return run


@_timed
def scaling_identity() -> CheckResult:
    worst = 0.0
    for t in T_GRID:
        for g in GAMMA_GRID:
            c = scaling_constants(ModelParams(t, g))
            worst = max(worst, abs(c.c2 * c.a0**3 * c.b0**3 - 0.25) / 0.25)
    return CheckResult("scaling_identity", worst < 1e-12, worst, 1e-12)


@_timed
def geometric_closed_form() -> CheckResult:
    worst = 0.0
    for t in (0.3, 0.5, 0.7):
        tab = build_table(SymbolSpec(t, 1, 1))
        for n in range(11):
            exact = 1 - t ** (2 * (n + 1))
            worst = max(worst, abs(math.exp(tab.log_cdf(n)) - exact))
    return CheckResult("geometric_closed_form", worst < 1e-12, worst, 1e-12)


@_timed
def oracle_equivalence() -> CheckResult:
    worst = 0.0
    for t in (0.3, 0.6):
        for M in (1, 2, 3):
            for N in (1, 2, 3):
                tab = build_table(SymbolSpec(t, M, N))
                ora = exact_cdf_small(t, M, N, 6)
                for n in range(7):
                    worst = max(worst, abs(tab.log_cdf(n) - math.log(ora(n))))
    return CheckResult("oracle_equivalence", worst < 1e-10, worst, 1e-10)


@_timed
def monte_carlo(count: int = 100_000, seed: int = 20240601) -> CheckResult:
    """Largest z-score of the empirical CDF against the exact one.

    Levels whose exact probability is within 1e-12 of 0 or 1 have a
    vanishing standard deviation; there the check is exact agreement up to
    one sample.
    """
    t, M, N = 0.5, 8, 8
    batch = sample_g(t, M, N, seed, count)
    tab = build_table(SymbolSpec(t, M, N))
    worst, worst_n = 0.0, None
    for n in range(int(batch.values.max()) + 1):
        p = math.exp(tab.log_cdf(n))
        emp = empirical_cdf(batch, n)
        sd = math.sqrt(p * (1 - p) / count)
        if sd < 1e-6:
            z = 0.0 if abs(emp - p) <= 1.0 / count else math.inf
        else:
            z = abs(emp - p) / sd
        if z > worst:
            worst, worst_n = z, n
    return CheckResult("monte_carlo", worst <= 4.0, worst, 4.0,
                       {"worst_level": worst_n, "count": count, "seed": seed})


@_timed
def endpoint_suite(h: float = 1e-4) -> CheckResult:
    worst_h, bad = 0.0, []
    for t in (0.5, 1 / math.sqrt(2)):
        for g in (1.0, 2.0):
            p = ModelParams(t, g)
            a0 = centering(p)
            for a in np.arange(a0 + 0.01, 2 * a0 + 1e-12, 0.01):
                ep = solve_endpoint(float(a), p, check=False)
                worst_h = max(worst_h, abs(endpoint_equation(ep.r, ep.a, p)))
                v = endpoint_violations(ep)
                if v:
                    bad.append((t, g, float(a), v))
    p = ModelParams(REF_T, REF_GAMMA)
    a0 = centering(p)
    cf = a0_closed_forms(p)
    # one-sided Richardson; smaller h runs into the near-triple root of H
    d1 = (solve_endpoint(a0 + h, p).r - cf.r0) / h
    d2 = (solve_endpoint(a0 + 2 * h, p).r - cf.r0) / (2 * h)
    slope = 2 * d1 - d2
    slope_err = abs(slope - cf.r_prime_a0) / abs(cf.r_prime_a0)
    ok = worst_h < 1e-12 and not bad and slope_err < 1e-4
    return CheckResult("endpoint_suite", ok, max(worst_h, slope_err), 1e-4,
                       {"max_abs_H": worst_h, "invariant_failures": bad[:5],
                        "slope_rel_err": slope_err})


@_timed
def delta_expansion(eps: float = 1e-4) -> CheckResult:
    worst0, worst2 = 0.0, 0.0
    for t in (0.5, 1 / math.sqrt(2)):
        for g in (1.0, 2.0):
            p = ModelParams(t, g)
            c = scaling_constants(p)
            d0 = delta(solve_endpoint(c.a0, p))
            second = (delta_of_a(c.a0 + eps, p) - 2 * d0
                      + delta_of_a(c.a0 - eps, p)) / eps**2
            worst0 = max(worst0, abs(d0))
            worst2 = max(worst2, abs(second + 2 * c.c2) / (2 * c.c2))
    ok = worst0 < 1e-12 and worst2 < 1e-3
    return CheckResult("delta_expansion", ok, worst2, 1e-3,
                       {"max_abs_delta_a0": worst0, "second_diff_rel_err": worst2})


def _reference_contours():
    ep = solve_endpoint(REF_A, ModelParams(REF_T, REF_GAMMA))
    return ep, build_contours(ep)


@_timed
def contour_topology() -> CheckResult:
    ep, cs = _reference_contours()
    t = ep.params.t
    conj = max(conjugation_residual(p, ep) for p in cs.trajectories + cs.orthogonals)
    period = abs(real_period_residual(ep, -0.5 * (t + 1 / t)))
    crosses = cs.gamma1.kind == TRAJECTORY and cs.p_i > 0
    ok = crosses and cs.z0_miss < 1e-6 and conj < 1e-8 and period < 1e-6
    return CheckResult("contour_topology", ok, max(cs.z0_miss, period), 1e-6,
                       {"p_i": cs.p_i, "z0_miss": cs.z0_miss, "conjugation": conj,
                        "real_period": period, "topology": cs.topology()})


@_timed
def rhp_residuals(count: int = 200) -> CheckResult:
    ep = solve_endpoint(REF_A, ModelParams(REF_T, REF_GAMMA))
    rep = check_scalar_rhp(make_context(ep), count=count)
    worst = max(r.max_residual for r in rep.residuals)
    margins = [r.margin for r in rep.residuals if r.margin is not None]
    ok = worst < 1e-6 and all(m > 0 for m in margins)
    return CheckResult("rhp_residuals", ok, worst, 1e-6,
                       {r.property: r.max_residual for r in rep.residuals}
                       | {"min_sign_margin": min(margins)})


@_timed
def asymptotic_agreement() -> CheckResult:
    t, g, a = 0.5, 1.0, 0.6
    errs = {}
    for k in (100, 400):
        N = round(a * k)
        errs[k] = compare_y21(t, g, N, N, [k]).rows[0]["rel_err"]
    ok = errs[400] < errs[100] and errs[400] < 0.1
    return CheckResult("asymptotic_agreement", ok, errs[400], 0.1,
                       {"rel_err_k100": errs[100], "rel_err_k400": errs[400]})


def trend_toward_one(ratios, inversions_allowed: int = 1) -> bool:
    """Distance to 1 shrinks from first to last with at most one inversion."""
    d = [abs(r - 1) for r in ratios]
    inv = sum(1 for u, v in zip(d, d[1:]) if v > u)
    return d[-1] < d[0] and inv <= inversions_allowed


@_timed
def moderate_deviation(N_list=(125, 216, 512), x: float = 3.0) -> CheckResult:
    t, g = 0.5, 1.0
    windows = {N: tail_window(t, g, N, x) for N in N_list}
    ratios = [windows[N].ratio for N in N_list]
    # telescoping against log_cdf differences
    tel = 0.0
    for N, w in windows.items():
        tab = cached_table(SymbolSpec(t, N, N))
        tel = max(tel, abs(w.value - (tab.log_cdf(w.n) - tab.log_cdf(w.b))))
    r216 = windows[216].ratio if 216 in windows else ratios[len(ratios) // 2]
    ok = 0.6 <= r216 <= 1.4 and trend_toward_one(ratios) and tel < 1e-10
    return CheckResult("moderate_deviation", ok, r216, 1.4,
                       {"ratios": dict(zip(N_list, ratios)), "telescoping": tel,
                        "windows": {N: (w.n, w.b) for N, w in windows.items()}})


@_timed
def moment_stabilization(N_pair=(128, 256)) -> CheckResult:
    worst, det = 0.0, {}
    for m in (1, 2):
        rep = moment_stability(0.5, 1.0, list(N_pair), m)
        rc = rep.rows[-1]["rel_change"]
        det[f"m{m}"] = [r["moment"] for r in rep.rows]
        worst = max(worst, rc)
    return CheckResult("moment_stabilization", worst < 0.25, worst, 0.25, det)


ACCEPTANCE = (scaling_identity, geometric_closed_form, oracle_equivalence, monte_carlo,
              endpoint_suite, delta_expansion, contour_topology, rhp_residuals,
              asymptotic_agreement, moderate_deviation, moment_stabilization)

SUITES = {
    "identities": (scaling_identity, geometric_closed_form, oracle_equivalence,
                   endpoint_suite, delta_expansion),
    "rhp": (contour_topology, rhp_residuals),
    "tails": (asymptotic_agreement, moderate_deviation, moment_stabilization),
    "all": ACCEPTANCE,
}
