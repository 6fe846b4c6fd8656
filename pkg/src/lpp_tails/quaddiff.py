"""Trajectories of the quadratic differential ``Q(z) dz^2``.

``Q`` has simple zeros at ``xi``, ``conj(xi)``, a double zero at ``-z0`` and
double poles at ``0, -t, -1/t``.  Trajectories (``Q dz^2 > 0``) and orthogonal
trajectories (``Q dz^2 < 0``) are traced as level curves of
``zeta(z) = int sqrt(Q) dz``: ``Im zeta`` is constant on trajectories and
``Re zeta`` on orthogonal ones.  Each RK4 step on the unit direction field is
followed by a Newton projection back onto the level curve, with ``zeta``
accumulated by Gauss-Legendre quadrature along the accepted chords.
"""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .endpoint import EndpointData

TRAJECTORY = "trajectory"
ORTHOGONAL = "orthogonal"
KINDS = (TRAJECTORY, ORTHOGONAL)

REAL_AXIS_CROSSING = "real_axis_crossing"
REACHED_ZERO = "reached_zero"
LEFT_DOMAIN = "left_domain"
STEP_LIMIT = "step_limit"

POLE_GUARD = 1e-12
ILL_CONDITIONED_IM_XI = 1e-3

_GL_X, _GL_W = np.polynomial.legendre.leggauss(6)


class PoleProximityError(ValueError):
    pass


class ClassificationError(RuntimeError):
    """No traced trajectory has the expected global behaviour."""


@dataclass
class TraceOptions:
    h_max: float | None = None          # default 1e-2 / t
    seed_offset: float | None = None    # default 1e-6 / t
    r_max: float | None = None          # default 10 / t
    step_fraction: float = 1.0 / 50.0
    max_steps: int = 200_000
    pole_tol: float = 1e-9
    crossing_tol: float = 1e-10
    zero_tol: float = 1e-10
    approach_radius: float = 1e-2
    project: bool = True

    def resolved(self, t: float) -> "TraceOptions":
        return TraceOptions(
            h_max=1e-2 / t if self.h_max is None else self.h_max,
            seed_offset=1e-6 / t if self.seed_offset is None else self.seed_offset,
            r_max=10.0 / t if self.r_max is None else self.r_max,
            step_fraction=self.step_fraction, max_steps=self.max_steps,
            pole_tol=self.pole_tol, crossing_tol=self.crossing_tol,
            zero_tol=self.zero_tol, approach_radius=self.approach_radius,
            project=self.project)


@dataclass
class ComplexPath:
    points: np.ndarray
    kind: str
    start_label: str
    termination: str
    crossing: float | None = None
    zeta: np.ndarray | None = None
    miss: float | None = None           # closest distance to a target zero

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")

    def conjugate(self) -> "ComplexPath":
        label = {"xi": "xi_bar", "xi_bar": "xi"}.get(self.start_label, self.start_label)
        return ComplexPath(points=np.conj(self.points), kind=self.kind,
                           start_label=label, termination=self.termination,
                           crossing=self.crossing,
                           zeta=None if self.zeta is None else np.conj(self.zeta),
                           miss=self.miss)

    def arclength(self) -> np.ndarray:
        seg = np.abs(np.diff(self.points))
        return np.concatenate([[0.0], np.cumsum(seg)])

    def max_step(self) -> float:
        return float(np.max(np.abs(np.diff(self.points)))) if len(self.points) > 1 else 0.0

    def write_csv(self, path) -> None:
        s = self.arclength()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["s", "re_z", "im_z"])
            for si, z in zip(s, self.points):
                w.writerow([f"{si:.17g}", f"{z.real:.17g}", f"{z.imag:.17g}"])


# ---------------------------------------------------------------- evaluation

def poles(ep: EndpointData) -> tuple[float, float, float]:
    t = ep.params.t
    return 0.0, -t, -1.0 / t


def zeros(ep: EndpointData) -> tuple[complex, complex, float]:
    return ep.xi, ep.xi_bar, -ep.z0


def _q(z: complex, ep: EndpointData) -> complex:
    t, g, a = ep.params.t, ep.params.gamma, ep.a
    al, be = ep.xi.real, ep.xi.imag
    w = z - al
    num = (w * w + be * be) * (z + ep.z0) ** 2
    den = (z * (z + t) * (z + 1.0 / t)) ** 2
    return -(1 + g * a) ** 2 * num / den


def q_eval(z: complex, ep: EndpointData) -> complex:
    """``Q(z)``; real (and negative) on the real axis away from its zeros."""
    for p in poles(ep):
        if abs(z - p) < POLE_GUARD:
            raise PoleProximityError(f"z={z!r} is within {POLE_GUARD} of the pole {p}")
    return _q(complex(z), ep)


def q_residual_factor(z: complex, ep: EndpointData) -> complex:
    """``F(z) = Q(z)/(z - xi)``, so ``Q'(xi) = F(xi)``."""
    t, g, a = ep.params.t, ep.params.gamma, ep.a
    return (-(1 + g * a) ** 2 * (z - ep.xi_bar) * (z + ep.z0) ** 2
            / (z * (z + t) * (z + 1.0 / t)) ** 2)


def double_zero_coefficient(ep: EndpointData) -> complex:
    """``c`` with ``Q(z) ~ c (z + z0)^2`` near ``-z0``."""
    t, g, a = ep.params.t, ep.params.gamma, ep.a
    z = -ep.z0
    return -(1 + g * a) ** 2 * (z - ep.xi) * (z - ep.xi_bar) / (z * (z + t) * (z + 1 / t)) ** 2


def _match(s: complex, ref: complex) -> complex:
    """The square-root sign of ``s`` closest to ``ref``."""
    return s if (s * ref.conjugate()).real >= 0 else -s


def sqrt_q(z: complex, ep: EndpointData, ref: complex | None = None) -> complex:
    s = cmath.sqrt(_q(z, ep))
    return s if ref is None else _match(s, ref)


def local_directions(point: str, kind: str, ep: EndpointData) -> list[complex]:
    """Unit tangents of the critical (orthogonal) trajectories leaving a zero."""
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    shift = 0.0 if kind == TRAJECTORY else math.pi
    if point in ("xi", "xi_bar"):
        arg = cmath.phase(q_residual_factor(ep.xi, ep))
        dirs = [cmath.exp(1j * (shift - arg + 2 * math.pi * k) / 3) for k in range(3)]
        return dirs if point == "xi" else [d.conjugate() for d in dirs]
    if point == "minus_z0":
        arg = cmath.phase(double_zero_coefficient(ep))
        return [cmath.exp(1j * (shift - arg + 2 * math.pi * k) / 4) for k in range(4)]
    raise ValueError(f"unknown point label {point!r}")


# ------------------------------------------------------------------- tracing

def _gl_increment(z0: complex, z1: complex, ep: EndpointData, ref: complex) -> tuple[complex, complex]:
    """``int_{z0}^{z1} sqrt(Q)`` on the chord, branch continued from ``ref``."""
    mid, half = 0.5 * (z0 + z1), 0.5 * (z1 - z0)
    acc = 0j
    cur = ref
    for xk, wk in zip(_GL_X, _GL_W):
        cur = sqrt_q(mid + half * xk, ep, cur)
        acc += wk * cur
    return acc * half, cur


class _Tracer:
    def __init__(self, ep: EndpointData, kind: str, opts: TraceOptions):
        self.ep, self.kind, self.o = ep, kind, opts
        self.kappa = 1.0 if kind == TRAJECTORY else 1j
        self.specials = list(poles(ep)) + list(zeros(ep))

    def field(self, z: complex, ref: complex) -> tuple[complex, complex]:
        s = sqrt_q(z, self.ep, ref)
        return self.kappa * s.conjugate() / abs(s), s

    def level_error(self, zeta: complex, level: complex) -> float:
        d = zeta - level
        return d.imag if self.kind == TRAJECTORY else d.real

    def step(self, z, s, zeta, h, level):
        k1, _ = self.field(z, s)
        k2, _ = self.field(z + 0.5 * h * k1, s)
        k3, _ = self.field(z + 0.5 * h * k2, s)
        k4, _ = self.field(z + h * k3, s)
        z1 = z + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
        dz, s1 = _gl_increment(z, z1, self.ep, s)
        zeta1 = zeta + dz
        if self.o.project:
            e = self.level_error(zeta1, level)
            corr = -(e if self.kind == ORTHOGONAL else 1j * e) / s1
            if abs(corr) < 0.1 * h:
                z1 += corr
                zeta1 += corr * s1
                s1 = sqrt_q(z1, self.ep, s1)
        return z1, s1, zeta1

    def dist(self, z: complex) -> float:
        return min(abs(z - p) for p in self.specials)


def trace(start: complex, direction: complex, kind: str, ep: EndpointData,
          opts: TraceOptions | None = None, *, start_label: str = "seed",
          zeta0: complex | None = None, target_zero: complex | None = None) -> ComplexPath:
    """Follow ``kind`` from ``start`` leaving along ``direction``.

    ``zeta0`` is the value of ``zeta`` at ``start`` (relative to whatever base
    point defines the level curve); it defaults to 0.  When ``target_zero`` is
    given, tracing stops at the closest approach to that point.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    o = (opts or TraceOptions()).resolved(ep.params.t)
    start = complex(start)
    if abs(start) >= o.r_max:
        raise ValueError("start lies outside the tracing domain")
    tr = _Tracer(ep, kind, o)
    if tr.dist(start) == 0.0:
        raise ValueError("start sits on a zero or pole; seed it off the point")
    direction = complex(direction) / abs(direction)
    s = cmath.sqrt(_q(start, ep))
    proj = s * direction * (1.0 if kind == TRAJECTORY else -1j)
    if proj.real < 0:
        s = -s
    zeta = 0j if zeta0 is None else complex(zeta0)
    level = zeta
    on_axis = start.imag == 0.0

    pts, zs = [start], [zeta]
    z = start
    termination, crossing, miss = STEP_LIMIT, None, None
    dmin, imin = math.inf, 0
    for _ in range(o.max_steps):
        h = min(o.h_max, tr.dist(z) * o.step_fraction)
        z1, s1, zeta1 = tr.step(z, s, zeta, h, level)
        if not on_axis and (z1.imag == 0.0 or (z1.imag > 0) != (z.imag > 0)):
            lo, hi = 0.0, h
            zc, sc, zetac = z1, s1, zeta1
            for _ in range(200):
                if abs(zc.imag) < o.crossing_tol:
                    break
                mid = 0.5 * (lo + hi)
                zc, sc, zetac = tr.step(z, s, zeta, mid, level)
                if zc.imag == 0.0 or (zc.imag > 0) != (z.imag > 0):
                    hi = mid
                else:
                    lo = mid
            pts.append(zc)
            zs.append(zetac)
            termination, crossing = REAL_AXIS_CROSSING, zc.real
            break
        z, s, zeta = z1, s1, zeta1
        pts.append(z)
        zs.append(zeta)
        if target_zero is not None:
            d = abs(z - target_zero)
            if d < dmin:
                dmin, imin = d, len(pts) - 1
            if d < o.zero_tol or (dmin < o.approach_radius and d > 2.0 * dmin):
                del pts[imin + 1:], zs[imin + 1:]
                termination, miss = REACHED_ZERO, dmin
                crossing = pts[-1].real
                break
        if abs(z) > o.r_max or min(abs(z - p) for p in poles(ep)) < o.pole_tol:
            termination = LEFT_DOMAIN
            break
    return ComplexPath(points=np.array(pts), kind=kind, start_label=start_label,
                       termination=termination, crossing=crossing,
                       zeta=np.array(zs), miss=miss)


def trace_from_zero(point: str, direction: complex, kind: str, ep: EndpointData,
                    opts: TraceOptions | None = None, **kw) -> ComplexPath:
    """Seed a trace a small offset away from ``xi`` or ``conj(xi)``."""
    o = (opts or TraceOptions()).resolved(ep.params.t)
    base = ep.xi if point == "xi" else ep.xi_bar
    seed = base + o.seed_offset * direction
    # near a simple zero sqrt(Q) ~ sqrt(F) w^(1/2), so zeta ~ (2/3) sqrt(Q) w
    s = cmath.sqrt(_q(seed, ep))
    proj = s * direction * (1.0 if kind == TRAJECTORY else -1j)
    if proj.real < 0:
        s = -s
    zeta0 = (2.0 / 3.0) * s * (seed - base)
    path = trace(seed, direction, kind, ep, opts, start_label=point, zeta0=zeta0, **kw)
    path.points = np.concatenate([[base], path.points])
    path.zeta = np.concatenate([[0j], path.zeta])
    return path


# ---------------------------------------------------------- global structure

def classify_crossing(x: float | None, ep: EndpointData) -> str:
    t = ep.params.t
    if x is None:
        return "none"
    if x > 0:
        return "positive"
    if -t < x < 0:
        return "(-t,0)"
    if -1 / t < x < -t:
        return "(-1/t,-t)"
    return "(-inf,-1/t)"


@dataclass
class ContourSystem:
    gamma1: ComplexPath
    gamma2: ComplexPath
    p_i: float
    endpoint: EndpointData
    trajectories: list[ComplexPath] = field(default_factory=list)
    orthogonals: list[ComplexPath] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def z0_miss(self) -> float:
        return float(self.gamma2.miss if self.gamma2.miss is not None else math.inf)

    def gamma1_closed(self) -> np.ndarray:
        """Full ``Gamma_1`` from ``conj(xi)`` through ``p_i`` to ``xi``."""
        up = self.gamma1.points          # xi -> p_i
        down = np.conj(up)               # conj(xi) -> p_i
        return np.concatenate([down, up[::-1][1:]])

    def gamma2_closed(self) -> np.ndarray:
        """Full ``Gamma_2`` from ``xi`` through ``-z0`` to ``conj(xi)``."""
        up = self.gamma2.points
        tail = np.conj(up[::-1])
        return np.concatenate([up, tail[1:] if up[-1].imag == 0 else tail])

    def topology(self) -> list[str]:
        return [classify_crossing(p.crossing if p.termination == REAL_AXIS_CROSSING else None,
                                  self.endpoint) for p in self.trajectories]


def build_contours(ep: EndpointData, opts: TraceOptions | None = None) -> ContourSystem:
    if ep.degenerate or ep.xi.imag <= 0:
        raise ValueError("contours need a > a0 strictly (xi in the upper half plane)")
    warnings = []
    if ep.xi.imag < ILL_CONDITIONED_IM_XI:
        warnings.append(f"Im xi = {ep.xi.imag:.3g} < {ILL_CONDITIONED_IM_XI}: "
                        "endpoints nearly coalesce, tracing is ill conditioned")
    trajs = [trace_from_zero("xi", d, TRAJECTORY, ep, opts)
             for d in local_directions("xi", TRAJECTORY, ep)]
    right = [p for p in trajs if p.termination == REAL_AXIS_CROSSING and p.crossing > 0]
    if not right:
        raise ClassificationError("no trajectory from xi reaches the positive real axis")
    g1 = right[0]
    target = -ep.z0
    orths = [trace_from_zero("xi", d, ORTHOGONAL, ep, opts, target_zero=target)
             for d in local_directions("xi", ORTHOGONAL, ep)]
    hits = [p for p in orths if p.termination == REACHED_ZERO]
    if not hits:
        raise ClassificationError("no orthogonal trajectory from xi reaches -z0")
    g2 = min(hits, key=lambda p: p.miss)
    return ContourSystem(gamma1=g1, gamma2=g2, p_i=float(g1.crossing), endpoint=ep,
                         trajectories=trajs, orthogonals=orths, warnings=warnings)


def conjugation_residual(path: ComplexPath, ep: EndpointData,
                         opts: TraceOptions | None = None) -> float:
    """Trace from ``conj(xi)`` with the mirrored start and compare pointwise."""
    if path.start_label != "xi":
        raise ValueError("expected a path traced from xi")
    d = path.points[2] - path.points[1] if len(path.points) > 2 else path.points[1] - path.points[0]
    first = (path.points[1] - path.points[0])
    direction = (first / abs(first)).conjugate() if abs(first) > 0 else d.conjugate()
    target = -ep.z0 if path.miss is not None else None
    mirror = trace_from_zero("xi_bar", direction, path.kind, ep, opts, target_zero=target)
    n = min(len(mirror.points), len(path.points))
    return float(np.max(np.abs(mirror.points[:n] - np.conj(path.points[:n]))))


def direction_defect(path: ComplexPath, ep: EndpointData) -> float:
    """Largest angular distance of ``arg(Q dz^2)`` from 0 (trajectories) or
    pi (orthogonal), with ``Q`` taken at chord midpoints."""
    pts = path.points
    dz = np.diff(pts)
    keep = dz != 0
    mid = 0.5 * (pts[:-1] + pts[1:])[keep]
    dz = dz[keep]
    qv = np.array([q_eval(m, ep) for m in mid])
    target = 1.0 if path.kind == TRAJECTORY else -1.0
    return float(np.max(np.abs(np.angle(target * qv * dz * dz))))


# ------------------------------------------------------------- real period

def _segment_integral(z_from: complex, z_to: complex, ep: EndpointData,
                      n_panels: int, order: int) -> complex:
    """``int sqrt(Q)`` on the straight segment from a simple zero ``z_from``.

    ``z = z_from + (z_to - z_from) u^2`` removes the square-root behaviour at
    the start; the branch is continued node by node from ``u = 0``.
    """
    xg, wg = np.polynomial.legendre.leggauss(order)
    L = z_to - z_from
    acc = 0j
    ref = None
    for p in range(n_panels):
        a, b = p / n_panels, (p + 1) / n_panels
        for xk, wk in zip(xg, wg):
            u = 0.5 * (a + b) + 0.5 * (b - a) * xk
            z = z_from + L * u * u
            s = sqrt_q(z, ep, ref)
            ref = s
            acc += 0.5 * (b - a) * wk * s * 2 * L * u
    return acc


def real_period_residual(ep: EndpointData, x_target: float, n_panels: int = 64,
                         order: int = 16) -> float:
    """``Re int_xi^{x_target} sqrt(Q) dz`` along the straight segment in the upper half plane."""
    t = ep.params.t
    if not (-1 / t < x_target < -t):
        raise ValueError(f"x_target must lie in (-1/t, -t), got {x_target!r}")
    return float(_segment_integral(ep.xi, complex(x_target), ep, n_panels, order).real)


# ------------------------------------------------------ R(z) with a chosen cut

class BranchR:
    """``R(z) = sqrt((z - xi)(z - conj xi))`` cut along a polyline from
    ``conj(xi)`` to ``xi`` and normalised by ``R(z) ~ z`` at infinity.

    The principal product of square roots is cut along the two leftward
    horizontal rays from ``xi`` and ``conj(xi)``.  Flipping its sign inside the
    region bounded by those rays and the requested cut moves the cut.
    """

    def __init__(self, ep: EndpointData, cut: np.ndarray | None = None):
        self.ep = ep
        if cut is None:
            cut = default_cut(ep)
        self.cut = np.asarray(cut, dtype=complex)
        self._a = self.cut[:-1]
        self._b = self.cut[1:]

    def _crossings(self, z: complex) -> int:
        # upward vertical ray from z against the polyline
        a, b = self._a, self._b
        xa, xb = a.real, b.real
        lo, hi = np.minimum(xa, xb), np.maximum(xa, xb)
        mask = (lo <= z.real) & (z.real < hi)
        if not mask.any():
            return 0
        aa, bb = a[mask], b[mask]
        frac = (z.real - aa.real) / (bb.real - aa.real)
        yint = aa.imag + frac * (bb.imag - aa.imag)
        return int(np.count_nonzero(yint > z.imag))

    def inside(self, z: complex) -> bool:
        xi = self.ep.xi
        n = self._crossings(z)
        if z.real < xi.real:
            n += int(z.imag < xi.imag) + int(z.imag < -xi.imag)
        return n % 2 == 1

    def __call__(self, z: complex) -> complex:
        z = complex(z)
        p = cmath.sqrt(z - self.ep.xi) * cmath.sqrt(z - self.ep.xi_bar)
        return -p if self.inside(z) else p

    def sqrt_q(self, z: complex) -> complex:
        """Globally defined ``sqrt(Q) = i (1+ga) R (z+z0) / (z (z+t)(z+1/t))``."""
        ep = self.ep
        t, g, a = ep.params.t, ep.params.gamma, ep.a
        return 1j * (1 + g * a) * self(z) * (z + ep.z0) / (z * (z + t) * (z + 1 / t))


def default_cut(ep: EndpointData, n: int = 400) -> np.ndarray:
    """Circular arc ``|z| = r`` from ``conj(xi)`` through ``r`` to ``xi``."""
    th = np.linspace(-ep.theta_c, ep.theta_c, n)
    return ep.r * np.exp(1j * th)


def write_paths_csv(paths: Iterable[tuple[str, ComplexPath]], directory) -> list[str]:
    import os
    out = []
    for name, p in paths:
        fn = os.path.join(directory, f"{name}.csv")
        p.write_csv(fn)
        out.append(fn)
    return out
