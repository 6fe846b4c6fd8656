"""Model parameters and the fluctuation scaling constants.

The weights are geometric with ``P(w = k) = (1 - t^2) t^(2k)`` and the grid is
``M x N`` with ``M = [gamma N]``.  The centering ``1/a0`` and the scale ``b0``
describe ``G(M, N) ~ N/a0 + b0 N^(1/3) chi`` with ``chi`` Tracy-Widom (GUE).
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class DomainError(ValueError):
    """A parameter lies outside the region where the model is defined."""


@dataclass(frozen=True)
class ModelParams:
    t: float
    gamma: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.t < 1.0):
            raise DomainError(f"t must lie in (0, 1), got {self.t!r}")
        if not (self.gamma >= 1.0):
            raise DomainError(f"gamma must be >= 1, got {self.gamma!r}")

    @property
    def sqrt_gamma(self) -> float:
        return math.sqrt(self.gamma)


@dataclass(frozen=True)
class ScalingConstants:
    a0: float
    b0: float
    c2: float


def centering(params: ModelParams) -> float:
    t, g, sg = params.t, params.gamma, params.sqrt_gamma
    return (1.0 - t * t) / (t * ((g + 1.0) * t + 2.0 * sg))


def scaling_constants(params: ModelParams) -> ScalingConstants:
    t, g, sg = params.t, params.gamma, params.sqrt_gamma
    a0 = centering(params)
    b0 = (t ** (1.0 / 3.0) * g ** (-1.0 / 6.0) / (1.0 - t * t)
          * (t + sg) ** (2.0 / 3.0) * (1.0 + t * sg) ** (2.0 / 3.0))
    c2 = (t * t * (t + t * g + 2.0 * sg) ** 3 * sg
          / (4.0 * (1.0 + t * sg) ** 2 * (t + sg) ** 2))
    return ScalingConstants(a0=a0, b0=b0, c2=c2)


def md_coordinate(N: int, n: float, consts: ScalingConstants) -> float:
    """Invert ``n = N/a0 - x b0 N^(1/3)`` for ``x``."""
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N!r}")
    return (N / consts.a0 - n) / (consts.b0 * N ** (1.0 / 3.0))


def md_level(N: int, x: float, consts: ScalingConstants) -> float:
    """Real-valued level ``N/a0 - x b0 N^(1/3)``; callers floor it."""
    return N / consts.a0 - x * consts.b0 * N ** (1.0 / 3.0)


def grid_rows(gamma: float, N: int) -> int:
    """``M = [gamma N]`` with a guard against ``gamma*N`` landing a hair below an integer."""
    return int(math.floor(gamma * N + 1e-9))
