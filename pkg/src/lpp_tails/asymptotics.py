"""Asymptotic predictions compared with the exact distribution.

The one-step ratio ``-Y21(0; k) = P(G <= k-1) / P(G <= k)`` is predicted by
``exp(k Delta(a)) sin(theta_c / 2)`` with ``a = N/k``.  Summing its logarithm
over the moderate-deviation window gives the ``-x^3/12`` lower-tail law.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .core import ModelParams, grid_rows, md_level, scaling_constants
from .endpoint import solve_endpoint
from .gfunction import delta
from .toeplitz import SymbolSpec, cached_table

log = logging.getLogger(__name__)

DEFAULT_L = 2.0
DEFAULT_DELTA = 0.3
CDF_SATURATION = 1.0 - 1e-12


@dataclass(frozen=True)
class AsymptoticPrediction:
    k: int
    a: float
    delta: float
    sin_half_theta: float
    predicted_log_y21: float
    quadratic_surrogate: float


@dataclass
class ComparisonReport:
    rows: list[dict]
    metadata: dict = field(default_factory=dict)
    columns: tuple[str, ...] = ("k", "exact", "predicted", "abs_err", "rel_err")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_fmt(row.get(c)) for c in self.columns])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"metadata": self.metadata, "rows": self.rows},
                          indent=2, default=_json_default)

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.rows], dtype=float)


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.17g}"
    return "" if v is None else str(v)


def _json_default(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    raise TypeError(type(v))


def predict_log_y21(k: int, a: float, params: ModelParams) -> AsymptoticPrediction:
    consts = scaling_constants(params)
    ep = solve_endpoint(a, params)
    d = delta(ep)
    s = math.sin(ep.theta_c / 2)
    return AsymptoticPrediction(
        k=k, a=a, delta=d, sin_half_theta=s,
        predicted_log_y21=k * d + math.log(s),
        quadratic_surrogate=-consts.c2 * k * (a - consts.a0) ** 2)


def compare_y21(t: float, gamma: float, M: int, N: int, k_list,
                window: float = DEFAULT_DELTA) -> ComparisonReport:
    """Exact ``log(-Y21(0; k))`` against ``k Delta + log sin(theta_c/2)``."""
    params = ModelParams(t, gamma)
    a0 = scaling_constants(params).a0
    table = cached_table(SymbolSpec(t, M, N))
    rows = []
    for k in sorted(k_list):
        a = N / k
        row = {"k": k, "a": a, "exact": table.log_y21(k), "predicted": None,
               "abs_err": None, "rel_err": None, "flag": ""}
        if a <= a0:
            row["flag"] = "excluded: a <= a0"
        else:
            pred = predict_log_y21(k, a, params)
            err = row["exact"] - pred.predicted_log_y21
            row.update(predicted=pred.predicted_log_y21, abs_err=abs(err),
                       rel_err=abs(err) / abs(row["exact"]) if row["exact"] else math.inf)
            if a > (1 + window) * a0:
                row["flag"] = "outside heuristic validity window"
        rows.append(row)
    return ComparisonReport(rows=rows, metadata={"t": t, "gamma": gamma, "M": M, "N": N},
                            columns=("k", "a", "exact", "predicted", "abs_err", "rel_err", "flag"))


@dataclass(frozen=True)
class TailWindow:
    N: int
    x: float
    n: int
    b: int
    L: float
    delta: float
    L0: float
    value: float
    warnings: tuple[str, ...] = ()

    @property
    def ratio(self) -> float:
        return self.value / md_exponent(self.x)


def default_l0(params: ModelParams, L: float = DEFAULT_L) -> float:
    """Lower cut-off constant placing ``b`` at coordinate ``L/4``.

    The summation argument needs ``L > 2 L0 / (a0^(4/3) b0)``; this choice
    sits in the middle of the allowed range.
    """
    c = scaling_constants(params)
    return L * c.a0 ** (4.0 / 3.0) * c.b0 / 4.0


def tail_window(t: float, gamma: float, N: int, x: float, L: float = DEFAULT_L,
                delta: float = DEFAULT_DELTA, L0: float | None = None) -> TailWindow:
    params = ModelParams(t, gamma)
    c = scaling_constants(params)
    L0 = default_l0(params, L) if L0 is None else L0
    n = math.floor(md_level(N, x, c))
    b = math.floor(N / c.a0 - L0 / c.a0 ** (4.0 / 3.0) * N ** (1.0 / 3.0))
    warnings = []
    if not (L <= x <= delta * N ** (2.0 / 3.0)):
        warnings.append(f"x={x} outside the window [{L}, {delta * N ** (2 / 3):.4g}]")
    if n < 0:
        raise ValueError(f"level n={n} is negative; x too large for N={N}")
    table = cached_table(SymbolSpec(t, grid_rows(gamma, N), N))
    if b <= n:
        value = 0.0
        if b < n:
            warnings.append("upper end b lies below n; empty sum")
    else:
        # sum_{k=n+1}^{b} log(-Y21(0;k)) = -sum_{j=n}^{b-1} log N_j
        value = -math.fsum(table.log_ratios[n:b])
    for msg in warnings:
        log.warning(msg)
    return TailWindow(N=N, x=x, n=n, b=b, L=L, delta=delta, L0=L0, value=value,
                      warnings=tuple(warnings))


def tail_log_ratio(t: float, gamma: float, N: int, x: float, **kw) -> float:
    return tail_window(t, gamma, N, x, **kw).value


def md_exponent(x: float) -> float:
    return -x**3 / 12.0


def tw_left_tail_log(x: float) -> float:
    """Leading behaviour of ``log F(x)`` as ``x -> -inf``."""
    if x >= 0:
        raise ValueError("left tail needs x < 0")
    return x**3 / 12.0


def tw_right_tail_log(x: float) -> float:
    """Leading behaviour of ``log(1 - F(x))`` as ``x -> +inf``."""
    if x <= 0:
        raise ValueError("right tail needs x > 0")
    return -(4.0 / 3.0) * x**1.5 - math.log(16 * math.pi * x**1.5)


def exact_pmf(t: float, gamma: float, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Levels ``n`` and ``P(G = n)`` up to CDF saturation."""
    table = cached_table(SymbolSpec(t, grid_rows(gamma, N), N))
    lc = table.log_cdf_array()
    cdf = np.exp(lc)
    stop = int(np.searchsorted(cdf, CDF_SATURATION)) + 1
    stop = min(stop, cdf.size)
    cdf = cdf[:stop]
    pmf = np.diff(np.concatenate([[0.0], cdf]))
    return np.arange(stop), pmf


def scaled_moment(t: float, gamma: float, N: int, m: int) -> float:
    params = ModelParams(t, gamma)
    c = scaling_constants(params)
    n, pmf = exact_pmf(t, gamma, N)
    theta = (n - N / c.a0) / (c.b0 * N ** (1.0 / 3.0))
    return float(np.dot(pmf, theta**m) / pmf.sum())


def moment_stability(t: float, gamma: float, N_list, m: int) -> ComparisonReport:
    """``E[theta_N^m]`` across ``N`` with successive changes."""
    if not 0 <= m <= 4:
        raise ValueError("m must lie in 0..4")
    Ns = list(N_list)
    if any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise ValueError("N_list must be increasing")
    rows, prev = [], None
    for N in Ns:
        val = scaled_moment(t, gamma, N, m)
        row = {"N": N, "moment": val, "change": None, "rel_change": None}
        if prev is not None:
            row["change"] = val - prev
            row["rel_change"] = abs(val - prev) / abs(prev) if prev else math.inf
        rows.append(row)
        prev = val
    return ComparisonReport(rows=rows, metadata={"t": t, "gamma": gamma, "m": m},
                            columns=("N", "moment", "change", "rel_change"))
