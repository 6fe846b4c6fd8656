"""Scalar objects of the steepest-descent analysis: W, h, Phi, g, ell, Delta.

Everything is expressed through the branch ``R(z)`` cut along ``Gamma_1``.
``g`` uses the explicit logarithmic formula; path integration of ``h`` is kept
as an independent cross-check (:func:`g_by_integration`).
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .core import ModelParams
from .core import centering
from .endpoint import (A0_SNAP, EndpointData, a0_closed_forms, endpoint_equation,
                       endpoint_equation_prime, endpoint_from_r, solve_endpoint)
from .quaddiff import (ORTHOGONAL, TRAJECTORY, BranchR, ContourSystem, build_contours,
                       sqrt_q)

CUT_GUARD = 1e-14
RICHARDSON_EPS = (1e-6, 1e-7)

_GL16 = np.polynomial.legendre.leggauss(16)


class BranchCutError(ValueError):
    pass


class OnCutError(ValueError):
    """Evaluation requested on the jump contour; ask for a boundary value."""


# ------------------------------------------------------------------- W, W'

def w_eval(z: complex, a: float, params: ModelParams) -> complex:
    t, g = params.t, params.gamma
    z = complex(z)
    if z.imag == 0.0 and z.real <= 0.0:
        raise BranchCutError(f"z={z!r} lies on the cut (-inf, 0]")
    return -g * a * cmath.log(1 + t * z) - a * cmath.log(1 + t / z) + cmath.log(z)


def w_prime(z: complex, a: float, params: ModelParams) -> complex:
    t, g = params.t, params.gamma
    z = complex(z)
    for p in (0.0, -t, -1 / t):
        if abs(z - p) < CUT_GUARD:
            raise BranchCutError(f"z={z!r} sits on the pole {p}")
    return -g * a / (z + 1 / t) - a / (z + t) + (a + 1) / z


# ----------------------------------------------------------------- context

@dataclass
class GContext:
    ep: EndpointData
    contours: ContourSystem | None = None
    branch: BranchR | None = None

    def __post_init__(self):
        if self.branch is None:
            cut = None if self.contours is None else self.contours.gamma1_closed()
            self.branch = BranchR(self.ep, cut)

    @property
    def alpha(self) -> float:
        return self.ep.alpha

    @property
    def ell(self) -> complex:
        return ell(self.ep)

    @property
    def delta(self) -> float:
        return delta(self.ep)


def make_context(ep: EndpointData, with_contours: bool = True) -> GContext:
    return GContext(ep=ep, contours=build_contours(ep) if with_contours else None)


def _dist_to_polyline(z: complex, pts: np.ndarray) -> float:
    a, b = pts[:-1], pts[1:]
    d = b - a
    L2 = np.abs(d) ** 2
    u = np.where(L2 > 0, ((z - a) * np.conj(d)).real / np.where(L2 > 0, L2, 1), 0.0)
    u = np.clip(u, 0.0, 1.0)
    return float(np.min(np.abs(a + u * d - z)))


def r_eval(z: complex, ctx: GContext, guard: float = 1e-12) -> complex:
    z = complex(z)
    if _dist_to_polyline(z, ctx.branch.cut) < guard:
        raise OnCutError(f"z={z!r} is on the cut; use a boundary value")
    return ctx.branch(z)


# --------------------------------------------------------------- h and Phi

def _phi_from_r(z, R, ep):
    t, g, a = ep.params.t, ep.params.gamma, ep.a
    return (1 + g * a) * R * (z + ep.z0) / (z * (z + t) * (z + 1 / t))


def phi_eval(z: complex, ctx: GContext) -> complex:
    return _phi_from_r(complex(z), r_eval(z, ctx), ctx.ep)


def h_eval(z: complex, ctx: GContext) -> complex:
    """``h`` from its partial-fraction form (independent of ``Phi``)."""
    ep = ctx.ep
    t, g, a = ep.params.t, ep.params.gamma, ep.a
    z = complex(z)
    R = r_eval(z, ctx)
    corr = (g * a / ((z + 1 / t) * (-ep.x)) + a / ((z + t) * (-ep.y))
            - (a + 1) / (z * (-ep.r)))
    return 0.5 * w_prime(z, a, ep.params) + 0.5 * R * corr


# -------------------------------------------------------------------- g

def _g_from_r(z: complex, R: complex, ep: EndpointData) -> complex:
    t, g, a = ep.params.t, ep.params.gamma, ep.a
    x, y, r, al = ep.x, ep.y, ep.r, ep.alpha
    L = cmath.log
    s = z + R
    two_g = (-g * a * L(z + 1 / t) - a * L(z + t) + (a + 1) * L(z)
             + (1 + g * a) * L((z - al + R) / 2)
             - g * a * L((s + 1 / t - x) / (s + 1 / t + x))
             - a * L((s + t - y) / (s + t + y))
             + (a + 1) * L((s - r) / (s + r)))
    return 0.5 * two_g


def g_eval(z: complex, ctx: GContext) -> complex:
    z = complex(z)
    cut_end = ctx.contours.p_i if ctx.contours is not None else ctx.ep.r
    if z.imag == 0.0 and z.real <= cut_end:
        raise BranchCutError(f"z={z!r} lies on the cut of g; use a boundary value")
    return _g_from_r(z, r_eval(z, ctx), ctx.ep)


def ell(ep: EndpointData) -> complex:
    """``2 g(xi) - W(xi)`` in closed form (keeps its imaginary part)."""
    t, g, a = ep.params.t, ep.params.gamma, ep.a
    x, y, r, al, xi = ep.x, ep.y, ep.r, ep.alpha, ep.xi
    L = cmath.log
    return (g * a * math.log(t) + (1 + g * a) * L((xi - al) / 2)
            - g * a * L((xi + 1 / t - x) / (xi + 1 / t + x))
            - a * L((xi + t - y) / (xi + t + y))
            + (a + 1) * L((xi - r) / (xi + r)))


def delta_from_rxy(a: float, r: float, x: float, y: float, params: ModelParams) -> float:
    t, g = params.t, params.gamma
    return (-g * a * math.log(t) + (2 + a + g * a) * math.log(2) + (1 + a) * math.log(r)
            - 0.5 * math.log(r + 1 / t - x)
            - 0.5 * (1 + 2 * g * a) * math.log(r + 1 / t + x)
            - 0.5 * math.log(r + t - y)
            - 0.5 * (1 + 2 * a) * math.log(r + t + y))


def delta(ep: EndpointData) -> float:
    return delta_from_rxy(ep.a, ep.r, ep.x, ep.y, ep.params)


def delta_of_a(a: float, params: ModelParams) -> float:
    """``Delta`` as a function of ``a`` on both sides of ``a0``.

    Below ``a0`` the endpoint is not admissible and ``H`` has three roots near
    ``r0``.  The one continuing ``r(a)`` analytically through ``a0`` is found
    by Newton's method from the linear extrapolation ``r0 + r'(a0)(a - a0)``;
    a centered difference at ``a0`` needs exactly that branch.
    """
    a0 = centering(params)
    if a >= a0 - A0_SNAP:
        return delta(solve_endpoint(a, params, check=False))
    cf = a0_closed_forms(params)
    r = cf.r0 + cf.r_prime_a0 * (a - a0)
    for _ in range(60):
        step = endpoint_equation(r, a, params) / endpoint_equation_prime(r, a, params)
        r -= step
        if abs(step) < 4e-16 * r:
            break
    if abs(endpoint_equation(r, a, params)) > 1e-12:
        raise ArithmeticError("Newton iteration for the continued root did not converge")
    return delta(endpoint_from_r(a, r, params))


def g_at_zero(ctx: GContext) -> complex:
    """``g(0 + i0)`` by Richardson extrapolation of the closed form."""
    e1, e2 = 1e-4, 1e-5
    g1 = _g_from_r(1j * e1, ctx.branch(1j * e1), ctx.ep)
    g2 = _g_from_r(1j * e2, ctx.branch(1j * e2), ctx.ep)
    return (10 * g2 - g1) / 9


# ------------------------------------------------------- boundary values

def _tangent(z: complex, ep: EndpointData, kind: str, ref: complex) -> complex:
    s = sqrt_q(z, ep)
    v = (1.0 if kind == TRAJECTORY else 1j) * s.conjugate() / abs(s)
    return v if (v * ref.conjugate()).real >= 0 else -v


def boundary_value(f, z: complex, tangent: complex, side: str) -> complex:
    """Limit of ``f`` at ``z`` from the left (``+``) or right (``-``) of
    ``tangent``, Richardson-extrapolated from two offsets."""
    n = 1j * tangent / abs(tangent)
    sgn = 1.0 if side == "+" else -1.0
    e1, e2 = RICHARDSON_EPS
    return (10 * f(z + sgn * e2 * n) - f(z + sgn * e1 * n)) / 9


def _sample_indices(pts: np.ndarray, count: int, margin: float = 0.01) -> np.ndarray:
    """Vertex indices spread evenly in arclength, keeping a relative
    ``margin`` of the length away from both ends."""
    s = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(pts)))])
    targets = np.linspace(margin * s[-1], (1 - margin) * s[-1], count)
    return np.unique(np.searchsorted(s, targets).clip(1, len(pts) - 2))


def gamma1_samples(ctx: GContext, count: int = 200) -> list[tuple[complex, complex]]:
    """Points on the full ``Gamma_1`` with unit tangents oriented from ``conj(xi)`` to ``xi``."""
    cs = ctx.contours
    up = cs.gamma1.points
    idx = _sample_indices(up, (count + 1) // 2)
    out = []
    for i in idx:
        z = up[i]
        chord = up[max(i - 1, 0)] - up[min(i + 1, len(up) - 1)]   # orientation: towards xi
        T = _tangent(z, ctx.ep, TRAJECTORY, chord)
        out.append((z, T))
        out.append((z.conjugate(), -T.conjugate()))
    return out[:count]


def gamma2_samples(ctx: GContext, count: int = 200) -> list[tuple[complex, complex]]:
    """Points on ``Gamma_2 cap C_+`` with tangents oriented from ``xi`` to ``-z0``."""
    up = ctx.contours.gamma2.points
    idx = _sample_indices(up, count)
    out = []
    for i in idx:
        z = up[i]
        chord = up[min(i + 1, len(up) - 1)] - up[max(i - 1, 0)]
        out.append((z, _tangent(z, ctx.ep, ORTHOGONAL, chord)))
    return out


# ------------------------------------------------------------ quadrature

def _continued_sqrt(z: complex, ep: EndpointData, ref: complex | None) -> complex:
    v = cmath.sqrt(z - ep.xi) * cmath.sqrt(z - ep.xi_bar)
    if ref is not None and (v * ref.conjugate()).real < 0:
        v = -v
    return v


def _chord_nodes(za, zb, singular_start: bool, singular_end: bool):
    """Gauss nodes and weights on a chord; a square-root endpoint singularity
    is absorbed by ``u -> u^2`` (from the start) or ``1 - (1-u)^2`` (end)."""
    xg, wg = _GL16
    u = 0.5 * (xg + 1)
    w = 0.5 * wg
    d = zb - za
    if singular_start:
        return za + d * u * u, w * 2 * u * d
    if singular_end:
        v = 1 - u
        return zb - d * v * v, w * 2 * v * d
    return za + d * u, w * d


def integrate_on_gamma1(ctx: GContext, f) -> complex:
    """``int f(s, R_+(s)) ds`` over ``Gamma_1`` from ``conj(xi)`` to ``xi``.

    ``R_+`` is continued along the traced curve from its value
    ``-|p_i - xi|`` at ``p_i``, so the polyline never has to sit on the
    correct side of the true curve.
    """
    ep = ctx.ep
    up = ctx.contours.gamma1.points            # xi -> p_i
    p = up[-1]
    # upper half oriented p_i -> xi, lower half is its mirror image
    path = up[::-1]
    total = 0j
    ref = complex(-abs(p - ep.xi))
    for k in range(len(path) - 1):
        za, zb = path[k], path[k + 1]
        zs, ws = _chord_nodes(za, zb, False, k == len(path) - 2)
        for zk, wk in zip(zs, ws):
            ref = _continued_sqrt(zk, ep, ref)
            total += wk * f(zk, ref)
    # lower half: s -> conj(s), R_+(conj s) = conj(R_+(s)) by symmetry, ds -> conj
    lower = 0j
    ref = complex(-abs(p - ep.xi))
    for k in range(len(path) - 1):
        za, zb = path[k], path[k + 1]
        zs, ws = _chord_nodes(za, zb, False, k == len(path) - 2)
        for zk, wk in zip(zs, ws):
            ref = _continued_sqrt(zk, ep, ref)
            zc = zk.conjugate()
            rc = ref.conjugate()
            lower += wk.conjugate() * f(zc, rc)
    # the mirrored integral runs conj(xi) <- p_i, so it enters with a minus sign
    return total - lower


def endpoint_integrals(ctx: GContext) -> tuple[complex, complex]:
    """``int W'/R_+`` and ``(1/2 pi i) int s W'/R_+`` over ``Gamma_1``."""
    ep = ctx.ep
    wp = lambda s: w_prime(s, ep.a, ep.params)
    i0 = integrate_on_gamma1(ctx, lambda s, R: wp(s) / R)
    i1 = integrate_on_gamma1(ctx, lambda s, R: s * wp(s) / R)
    return i0, i1 / (2j * math.pi)


def psi2_profile(ctx: GContext) -> tuple[np.ndarray, np.ndarray]:
    """``Psi_2`` at every vertex of the closed ``Gamma_2`` polyline (``xi`` to ``conj xi``)."""
    ep = ctx.ep
    pts = ctx.contours.gamma2_closed()
    vals = [0j]
    acc = 0j
    n = len(pts)
    for k in range(n - 1):
        za, zb = pts[k], pts[k + 1]
        zs, ws = _chord_nodes(za, zb, k == 0, k == n - 2)
        acc += sum(wk * _phi_from_r(zk, ctx.branch(zk), ep) for zk, wk in zip(zs, ws))
        vals.append(acc)
    return pts, np.array(vals)


def psi2(z_on_gamma2: complex, ctx: GContext) -> float:
    """``Psi_2`` at the vertex of ``Gamma_2`` nearest to the given point."""
    pts, vals = psi2_profile(ctx)
    i = int(np.argmin(np.abs(pts - z_on_gamma2)))
    v = vals[i]
    if abs(v.imag) > 1e-6 * max(1.0, abs(v)):
        raise ArithmeticError(f"Psi_2 has imaginary part {v.imag:.3g}")
    return float(v.real)


def g_by_integration(z: complex, ctx: GContext, height: float = 60.0, n: int = 96,
                     approach: str = "vertical") -> complex:
    """``g(z)`` by integrating ``h`` along a straight segment from far away.

    ``approach="vertical"`` starts at ``Re z +/- i height``; ``"left"`` starts at
    ``-height + i Im z``.  At the far point the logarithms in the closed form
    are on their principal sheets.  The caller picks the approach so the
    segment misses ``Gamma_1``.
    """
    z = complex(z)
    if approach == "left":
        z_ref = complex(-height, z.imag)
    else:
        z_ref = complex(z.real, math.copysign(height, z.imag if z.imag != 0 else 1.0))
    xg, wg = np.polynomial.legendre.leggauss(n)
    d = z - z_ref
    # nodes cluster near the far end where h varies slowly; split in two panels
    acc = 0j
    for lo, hi in ((0.0, 0.9), (0.9, 1.0)):
        for x, w in zip(xg, wg):
            u = lo + (hi - lo) * 0.5 * (x + 1)
            acc += 0.5 * (hi - lo) * w * h_eval(z_ref + u * d, ctx)
    return _g_from_r(z_ref, ctx.branch(z_ref), ctx.ep) + acc * d


# --------------------------------------------------------- residual report

@dataclass
class Residual:
    property: str
    max_residual: float
    argmax_location: complex | None = None
    margin: float | None = None

    def to_dict(self) -> dict:
        loc = self.argmax_location
        return {"property": self.property, "max_residual": self.max_residual,
                "argmax_location": None if loc is None else [loc.real, loc.imag],
                "margin": self.margin}


@dataclass
class RHPReport:
    residuals: list[Residual] = field(default_factory=list)

    def __getitem__(self, name: str) -> Residual:
        for r in self.residuals:
            if r.property == name:
                return r
        raise KeyError(name)

    def to_json(self) -> str:
        return json.dumps([r.to_dict() for r in self.residuals], indent=2)


def _worst(pairs):
    best = (0.0, None)
    for val, loc in pairs:
        if not math.isfinite(val) or val > best[0]:
            best = (val, loc)
            if not math.isfinite(val):
                break
    return best


def check_scalar_rhp(ctx: GContext, count: int = 200) -> RHPReport:
    """Residuals of the jump, sign and normalisation properties on traced contours."""
    if ctx.contours is None:
        raise ValueError("contours are required")
    ep = ctx.ep
    a, params = ep.a, ep.params
    ell_v = ell(ep)
    hfun = lambda z: h_eval(z, ctx)
    gfun = lambda z: _g_from_r(z, ctx.branch(z), ep)
    s1 = gamma1_samples(ctx, count)
    s2 = gamma2_samples(ctx, count)

    jump, sign_c, marg_c, prop3 = [], [], [], []
    for z, T in s1:
        hp = boundary_value(hfun, z, T, "+")
        hm = boundary_value(hfun, z, T, "-")
        wp = w_prime(z, a, params)
        jump.append((abs(hp + hm - wp) / max(1.0, abs(wp)), z))
        q = 1j * (hp - hm) * T
        sign_c.append((abs(q.imag) / abs(q), z))
        marg_c.append(q.real / abs(q))
        gp = boundary_value(gfun, z, T, "+")
        gm = boundary_value(gfun, z, T, "-")
        e = cmath.exp(gp + gm - w_eval(z, a, params) - ell_v)
        prop3.append((abs(e - 1), z))

    sign_d, marg_d = [], []
    for z, T in s2:
        q = _phi_from_r(z, ctx.branch(z), ep) * T
        sign_d.append((abs(q.imag) / abs(q), z))
        marg_d.append(-q.real / abs(q))

    pts, psi = psi2_profile(ctx)
    idx = _sample_indices(ctx.contours.gamma2.points, count)
    prop5 = []
    for i in idx:
        z = pts[i]
        lhs = 2 * gfun(z) - w_eval(z, a, params) - ell_v
        prop5.append((abs(cmath.exp(lhs - psi[i]) - 1), z))
    psi_real = _worst((abs(v.imag), z) for v, z in zip(psi, pts))
    i0, i1 = endpoint_integrals(ctx)

    rep = RHPReport()
    rep.residuals.append(Residual("a_jump_sum", *_worst(jump)))
    rep.residuals.append(Residual("c_sign", *_worst(sign_c), margin=min(marg_c)))
    rep.residuals.append(Residual("d_sign", *_worst(sign_d), margin=min(marg_d)))
    rep.residuals.append(Residual("g_jump_3", *_worst(prop3)))
    rep.residuals.append(Residual("psi2_5", *_worst(prop5)))
    rep.residuals.append(Residual("psi2_real", *psi_real))
    rep.residuals.append(Residual("psi2_closes", abs(psi[-1]), pts[-1]))
    rep.residuals.append(Residual("endpoint_int_0", abs(i0)))
    rep.residuals.append(Residual("endpoint_int_1", abs(i1 + 1)))
    return rep
