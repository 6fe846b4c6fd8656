"""Endpoint geometry of the steepest-descent contour.

For ``a > a0`` the branch point ``xi = r e^{i theta_c}`` in the upper half
plane is fixed by one scalar equation ``H(r) = 0`` on ``(r1, r2)``; the
distances ``x = |xi + 1/t|`` and ``y = |xi + t|`` and the point ``z0`` follow
explicitly.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .core import DomainError, ModelParams, centering

A0_SNAP = 1e-9


class NoRootError(DomainError):
    """No admissible root; usually ``a < a0``."""


class InvariantError(RuntimeError):
    """A solved endpoint violates one of its structural inequalities."""


@dataclass(frozen=True)
class EndpointData:
    a: float
    r: float
    x: float
    y: float
    r1: float
    r2: float
    cos_theta: float
    theta_c: float
    xi: complex
    z0: float
    params: ModelParams

    @property
    def xi_bar(self) -> complex:
        return self.xi.conjugate()

    @property
    def alpha(self) -> float:
        return self.xi.real

    @property
    def degenerate(self) -> bool:
        return self.cos_theta <= -1.0


@dataclass(frozen=True)
class A0ClosedForms:
    r0: float
    x0: float
    y0: float
    r_prime_a0: float
    x_prime_a0: float
    y_prime_a0: float


def bracket(a: float, params: ModelParams) -> tuple[float, float]:
    if not a > 0:
        raise DomainError(f"a must be positive, got {a!r}")
    t, g = params.t, params.gamma
    return t * (a + 1) / (1 + g * a), (a + 1) / (t * (1 + g * a))


def _h_parts(a, params):
    t, g = params.t, params.gamma
    r1, r2 = bracket(a, params)
    K = (1 - t * t) * a * a / (1 + g * a) ** 2
    return t, g, r1, r2, K


def endpoint_equation(r: float, a: float, params: ModelParams) -> float:
    t, g, r1, r2, K = _h_parts(a, params)
    if not r1 < r < r2:
        raise DomainError(f"r={r!r} outside the bracket ({r1!r}, {r2!r})")
    return 1 / r**2 + K * (1 / (t * t * (r2 - r) ** 2) - g * g / (r - r1) ** 2) - 1


def endpoint_equation_prime(r: float, a: float, params: ModelParams) -> float:
    t, g, r1, r2, K = _h_parts(a, params)
    return -2 / r**3 + 2 * K * (1 / (t * t * (r2 - r) ** 3) + g * g / (r - r1) ** 3)


def a0_closed_forms(params: ModelParams) -> A0ClosedForms:
    t, g, s = params.t, params.gamma, params.sqrt_gamma
    p = 1 + t * s
    q = t + s
    w = t + t * g + 2 * s
    den = 4 * p * q**3
    return A0ClosedForms(
        r0=p / q,
        x0=s * (1 - t * t) / (t * q),
        y0=(1 - t * t) / q,
        r_prime_a0=-3 * (g - 1) * w**2 * t * t / den,
        x_prime_a0=(t + 4 * s + 3 * t * g) * w**2 * t / den,
        y_prime_a0=(4 * t * s + g + 3) * w**2 * t * t / den,
    )


def _assemble(a, r, x, y, params, r1, r2) -> EndpointData:
    t, g = params.t, params.gamma
    cos_x = (x * x - r * r - 1 / (t * t)) / (2 * r / t)
    cos_x = min(1.0, max(-1.0, cos_x))
    theta = math.acos(cos_x)
    return EndpointData(a=a, r=r, x=x, y=y, r1=r1, r2=r2, cos_theta=cos_x,
                        theta_c=theta, xi=cmath.rect(r, theta),
                        z0=(a + 1) / (r * (1 + g * a)), params=params)


def endpoint_from_r(a: float, r: float, params: ModelParams) -> EndpointData:
    """Fill in ``x, y, theta_c, xi, z0`` from a root ``r``."""
    t, g = params.t, params.gamma
    r1, r2 = bracket(a, params)
    x = a * g * (1 - t * t) / (t * (1 + g * a) * (1 - r1 / r))
    y = a * (1 - t * t) / (t * (1 + g * a) * (r2 / r - 1))
    return _assemble(a, r, x, y, params, r1, r2)


def solve_endpoint(a: float, params: ModelParams, check: bool = True) -> EndpointData:
    a0 = centering(params)
    if a < a0 - A0_SNAP:
        raise NoRootError(f"a={a!r} is below a0={a0!r}; no admissible endpoint")
    r1, r2 = bracket(a, params)
    if abs(a - a0) < A0_SNAP:
        # triple zero of H here; use the closed form
        cf = a0_closed_forms(params)
        return _assemble(a0, cf.r0, cf.x0, cf.y0, params, *bracket(a0, params))
    lo, hi = r1 * (1 + 1e-12), r2 * (1 - 1e-12)
    H = lambda r: endpoint_equation(r, a, params)
    if not (H(lo) < 0 < H(hi)):
        raise NoRootError("H does not change sign on the bracket")
    r = brentq(H, lo, hi, xtol=1e-300, rtol=4 * 2.220446049250313e-16, maxiter=500)
    # Newton polish, kept only if it does not increase the residual
    for _ in range(3):
        d = endpoint_equation_prime(r, a, params)
        if d == 0:
            break
        rn = r - H(r) / d
        if lo < rn < hi and abs(H(rn)) < abs(H(r)):
            r = rn
        else:
            break
    ep = endpoint_from_r(a, r, params)
    if check:
        violations = endpoint_violations(ep)
        if violations:
            raise InvariantError("; ".join(violations))
    return ep


def cos_theta_y(ep: EndpointData) -> float:
    t = ep.params.t
    return (ep.y * ep.y - ep.r * ep.r - t * t) / (2 * ep.r * t)


def endpoint_violations(ep: EndpointData, tol: float = 1e-10) -> list[str]:
    """Names of violated structural invariants (empty when all hold)."""
    t = ep.params.t
    out = []
    if not (ep.r1 < ep.r < ep.r2):
        out.append("r outside (r1, r2)")
    if not (ep.x > 0 and ep.y > 0):
        out.append("x, y must be positive")
    cx = (ep.x**2 - ep.r**2 - t**-2) / (2 * ep.r / t)
    if not (-1 < cx < 1):
        out.append(f"cos theta = {cx!r} not in (-1, 1)")
    if abs(cx - cos_theta_y(ep)) > tol:
        out.append("x- and y-based cos theta disagree")
    cons = 1 + (ep.y**2 - t * t * ep.x**2) / (1 - t * t)
    if abs(ep.r**2 - cons) > tol:
        out.append("r^2 consistency relation fails")
    if not (t < ep.z0 < 1 / t):
        out.append("z0 outside (t, 1/t)")
    return out
