"""Command-line entry point: ``lpp-tails {sample,exact,contours,validate}``.

Exit codes: 0 success, 1 suite failure, 2 invalid input, 3 resource guard.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import suites
from .core import DomainError, ModelParams, centering
from .endpoint import solve_endpoint
from .gfunction import check_scalar_rhp, make_context
from .percolation import (OracleGuardError, ResourceGuardError, exact_cdf_small,
                          sample_g)
from .quaddiff import build_contours, conjugation_residual, real_period_residual
from .toeplitz import DEFAULT_EPS, SymbolSpec, build_table

OUT_ENV = "LPP_TAILS_OUT"
EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_GUARD = 0, 1, 2, 3

log = logging.getLogger("lpp_tails")


class ValidationError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    t: float | None = None
    gamma: float = 1.0
    M: int | None = None
    N: int | None = None
    nmax: int | None = None
    a: float | None = None
    x: float | None = None
    seed: int = 0
    count: int | None = None
    eps: float = DEFAULT_EPS
    out: Path | None = None
    fmt: str = "csv"
    suite: str = "identities"
    check_oracle: bool = False
    extra: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.t is not None and not (0.0 < self.t < 1.0):
            raise ValidationError(f"--t must satisfy 0 < t < 1, got {self.t}")
        if self.gamma < 1.0:
            raise ValidationError(f"--gamma must be >= 1, got {self.gamma}")
        for name in ("M", "N", "count"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ValidationError(f"--{name} must be >= 1, got {v}")
        if self.nmax is not None and self.nmax < 0:
            raise ValidationError(f"--nmax must be >= 0, got {self.nmax}")
        if self.seed < 0 or self.seed >= 2**64:
            raise ValidationError("--seed must be a 64-bit unsigned integer")
        if not (0 < self.eps < 1):
            raise ValidationError("--eps must lie in (0, 1)")
        if self.fmt not in ("csv", "json"):
            raise ValidationError("--format must be csv or json")

    def out_dir(self) -> Path:
        d = self.out or Path(os.environ.get(OUT_ENV, "."))
        d.mkdir(parents=True, exist_ok=True)
        return d


# ------------------------------------------------------------------ output

def _num(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return _num(obj)


def dumps_json(obj) -> str:
    # repr of a Python float is the shortest round-trip form (<= 17 digits)
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def dumps_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([f"{v:.17g}" if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _write(path: Path, text: str) -> Path:
    path.write_text(text)
    print(f"wrote {path}")
    return path


def _emit_table(cfg: RunConfig, stem: str, header, rows, meta: dict) -> Path:
    d = cfg.out_dir()
    if cfg.fmt == "json":
        recs = [dict(zip(header, r)) for r in rows]
        return _write(d / f"{stem}.json", dumps_json({"metadata": meta, "rows": recs}))
    return _write(d / f"{stem}.csv", dumps_csv(header, rows))


# ------------------------------------------------------------------ commands

def cmd_sample(cfg: RunConfig) -> int:
    _require(cfg, "t", "M", "N", "count")
    batch = sample_g(cfg.t, cfg.M, cfg.N, cfg.seed, cfg.count)
    vals, counts = np.unique(batch.values, return_counts=True)
    cum = np.cumsum(counts) / batch.count
    rows = [(int(v), int(c), float(f)) for v, c, f in zip(vals, counts, cum)]
    meta = {"t": cfg.t, "M": cfg.M, "N": cfg.N, "seed": cfg.seed, "count": cfg.count}
    _emit_table(cfg, f"sample_t{cfg.t}_M{cfg.M}_N{cfg.N}_s{cfg.seed}",
                ("g", "count", "empirical_cdf"), rows, meta)
    return EXIT_OK


def cmd_exact(cfg: RunConfig) -> int:
    _require(cfg, "t", "M", "N")
    spec = SymbolSpec(cfg.t, cfg.M, cfg.N)
    tab = build_table(spec, eps=cfg.eps)
    nmax = tab.k_max if cfg.nmax is None else cfg.nmax
    lc = tab.log_cdf_array(nmax)
    lr = np.concatenate([tab.log_ratios, np.zeros(max(0, nmax + 1 - tab.log_ratios.size))])
    rows = [(n, float(lc[n]), float(math.exp(lc[n])), float(lr[n])) for n in range(nmax + 1)]
    meta = tab.to_dict()
    status = EXIT_OK
    if cfg.check_oracle:
        ora = exact_cdf_small(cfg.t, cfg.M, cfg.N, nmax)
        err = max(abs(lc[n] - math.log(ora(n))) for n in range(nmax + 1))
        meta["oracle_max_abs_log_err"] = err
        ok = err < 1e-10
        print(f"oracle agreement: max |log err| = {err:.3e} -> {'PASS' if ok else 'FAIL'}")
        status = EXIT_OK if ok else EXIT_FAIL
    _emit_table(cfg, f"exact_t{cfg.t}_M{cfg.M}_N{cfg.N}",
                ("n", "log_cdf", "cdf", "log_ratio"), rows, meta)
    if cfg.fmt == "csv":
        _write(cfg.out_dir() / f"exact_t{cfg.t}_M{cfg.M}_N{cfg.N}_meta.json", dumps_json(meta))
    return status


def cmd_contours(cfg: RunConfig) -> int:
    _require(cfg, "t", "a")
    params = ModelParams(cfg.t, cfg.gamma)
    a0 = centering(params)
    if not cfg.a > a0 * (1 + 1e-9):
        raise ValidationError(f"a must exceed a0 = {a0!r}, got {cfg.a!r}")
    ep = solve_endpoint(cfg.a, params)
    cs = build_contours(ep)
    d = cfg.out_dir()
    stem = f"contours_t{cfg.t:.8g}_g{cfg.gamma:g}_a{cfg.a:g}"
    for name, pts in (("gamma1", cs.gamma1_closed()), ("gamma2", cs.gamma2_closed())):
        s = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(pts)))])
        _write(d / f"{stem}_{name}.csv",
               dumps_csv(("s", "re_z", "im_z"), zip(s, pts.real, pts.imag)))
    t = cfg.t
    report = {
        "t": t, "gamma": cfg.gamma, "a": cfg.a, "a0": a0,
        "r": ep.r, "x": ep.x, "y": ep.y, "xi": ep.xi, "z0": ep.z0, "theta_c": ep.theta_c,
        "p_i": cs.p_i, "z0_crossing_residual": cs.z0_miss,
        "topology": cs.topology(),
        "conjugation_residual": max(conjugation_residual(p, ep)
                                    for p in cs.trajectories + cs.orthogonals),
        "real_period_residual": real_period_residual(ep, -0.5 * (t + 1 / t)),
        "warnings": cs.warnings,
    }
    if cfg.extra.get("rhp"):
        rep = check_scalar_rhp(make_context(ep))
        report["rhp"] = {r.property: r.max_residual for r in rep.residuals}
    _write(d / f"{stem}_report.json", dumps_json(report))
    ok = cs.p_i > 0 and cs.z0_miss < 1e-6
    print(f"p_i = {cs.p_i:.12g}, z0 crossing residual = {cs.z0_miss:.3e}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_validate(cfg: RunConfig) -> int:
    if cfg.suite not in suites.SUITES:
        raise ValidationError(f"--suite must be one of {sorted(suites.SUITES)}")
    checks = list(suites.SUITES[cfg.suite])
    results = []
    for chk in checks:
        if chk is suites.moderate_deviation and (cfg.N or cfg.x):
            res = _single_tail(cfg)
        else:
            res = chk()
        print(res.line())
        results.append(res)
    failed = [r.name for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} passed")
    if cfg.out is not None or OUT_ENV in os.environ:
        _write(cfg.out_dir() / f"validate_{cfg.suite}.json",
               dumps_json([{"name": r.name, "passed": r.passed, "value": r.value,
                            "threshold": r.threshold, "seconds": r.seconds,
                            "detail": r.detail} for r in results]))
    return EXIT_FAIL if failed else EXIT_OK


def _single_tail(cfg: RunConfig) -> suites.CheckResult:
    from .asymptotics import tail_window
    t = 0.5 if cfg.t is None else cfg.t
    N = cfg.N or 216
    x = 3.0 if cfg.x is None else cfg.x
    w = tail_window(t, cfg.gamma, N, x)
    ok = 0.6 <= w.ratio <= 1.4
    print(f"N={N} x={x} window n={w.n} b={w.b} sum={w.value:.12g} "
          f"target={-x**3 / 12:.12g} ratio={w.ratio:.6f}")
    return suites.CheckResult("moderate_deviation_single", ok, w.ratio, 1.4,
                              {"n": w.n, "b": w.b, "value": w.value, "warnings": w.warnings})


def _require(cfg: RunConfig, *names):
    missing = [n for n in names if getattr(cfg, n) is None]
    if missing:
        raise ValidationError("missing required flags: " + ", ".join("--" + m for m in missing))


COMMANDS = {"sample": cmd_sample, "exact": cmd_exact,
            "contours": cmd_contours, "validate": cmd_validate}


# ------------------------------------------------------------------ parsing

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lpp-tails",
                                description="Exact, sampled and asymptotic last-passage tails.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, need_t=True):
        sp.add_argument("--t", type=float, required=need_t)
        sp.add_argument("--gamma", type=float, default=1.0)
        sp.add_argument("--out", type=Path, default=None,
                        help=f"output directory (default ${OUT_ENV} or .)")
        sp.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")

    sp = sub.add_parser("sample", help="Monte Carlo samples of G(M,N)")
    common(sp)
    sp.add_argument("--M", type=int, required=True)
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--count", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("exact", help="exact distribution via Toeplitz ratios")
    common(sp)
    sp.add_argument("--M", type=int, required=True)
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--nmax", type=int, default=None)
    sp.add_argument("--eps", type=float, default=DEFAULT_EPS)
    sp.add_argument("--check-oracle", action="store_true")

    sp = sub.add_parser("contours", help="trace Gamma_1 and Gamma_2")
    common(sp)
    sp.add_argument("--a", type=_a_value, required=True,
                    help="inverse slope N/k; the literal 'a0' selects the critical value")
    sp.add_argument("--rhp", action="store_true", help="also run the scalar RHP residuals")

    sp = sub.add_parser("validate", help="run a validation suite")
    common(sp, need_t=False)
    sp.add_argument("--suite", choices=sorted(suites.SUITES), default="identities")
    sp.add_argument("--N", type=int, default=None)
    sp.add_argument("--x", type=float, default=None)
    sp.add_argument("--a", type=float, default=None)
    return p


def _a_value(s: str):
    return s if s == "a0" else float(s)


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    d = vars(ns).copy()
    cfg = RunConfig(command=d.pop("command"))
    d.pop("verbose", None)
    extra = {}
    for k, v in d.items():
        if hasattr(cfg, k):
            setattr(cfg, k, v)
        else:
            extra[k] = v
    cfg.extra = extra
    if cfg.a == "a0":
        cfg.a = centering(ModelParams(cfg.t, cfg.gamma))
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INVALID if e.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(ns)
        cfg.validate()
        return COMMANDS[cfg.command](cfg)
    except (ValidationError, DomainError, OracleGuardError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except ResourceGuardError as e:
        print(f"resource guard: {e}", file=sys.stderr)
        return EXIT_GUARD
    except RuntimeError as e:
        print(f"failed: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
