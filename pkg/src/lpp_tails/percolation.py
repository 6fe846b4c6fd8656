"""Monte Carlo sampling of G(M, N) and a brute-force oracle for tiny grids.

Neither routine touches the Toeplitz machinery, so both serve as independent
checks on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

DEFAULT_BUDGET = 5 * 10**8          # max M*N*count cells per sample_g call
BLOCK = 4096                        # samples per RNG block


class ResourceGuardError(RuntimeError):
    """Requested work exceeds a configured budget."""


class OracleGuardError(ValueError):
    """Grid too large for the exact enumeration."""


@dataclass
class SampleBatch:
    seed: int
    count: int
    values: np.ndarray
    M: int
    N: int
    t: float

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.int64)
        if self.values.shape != (self.count,):
            raise ValueError("values must hold exactly `count` samples")


@dataclass
class ExactSmallTable:
    t: float
    M: int
    N: int
    n_max: int
    cdf: dict[int, float] = field(default_factory=dict)

    def __call__(self, n: int) -> float:
        if n < 0:
            return 0.0
        if n > self.n_max:
            raise KeyError(f"n={n} beyond n_max={self.n_max}")
        return self.cdf[n]


def _check_grid(t: float, M: int, N: int) -> None:
    if not (0.0 < t < 1.0):
        raise ValueError(f"t must lie in (0, 1), got {t!r}")
    if M < 1 or N < 1:
        raise ValueError(f"M, N must be >= 1, got {(M, N)!r}")


def _block_rng(seed: int, block: int) -> np.random.Generator:
    # Philox is counter based: the block index selects an independent stream,
    # so any partition of the sample range reproduces the same draws.
    return np.random.Generator(np.random.Philox(key=seed & (2**64 - 1),
                                                counter=[0, 0, 0, block]))


def geometric_weights(rng: np.random.Generator, t: float, shape) -> np.ndarray:
    """Draws with ``P(w = k) = (1 - t^2) t^(2k)`` by inversion."""
    u = 1.0 - rng.random(shape)          # in (0, 1]
    return np.floor(np.log(u) / math.log(t * t)).astype(np.int64)


def _lpp_block(w: np.ndarray) -> np.ndarray:
    """Last-passage values for a stack of weight grids of shape (B, M, N)."""
    B, M, N = w.shape
    row = np.zeros((B, N), dtype=np.int64)
    for i in range(M):
        prev = np.zeros(B, dtype=np.int64)
        wi = w[:, i, :]
        for j in range(N):
            prev = np.maximum(prev, row[:, j]) + wi[:, j]
            row[:, j] = prev
    return row[:, -1].copy()


def sample_range(t: float, M: int, N: int, seed: int, start: int, stop: int) -> np.ndarray:
    """Samples with indices ``start..stop-1`` of the stream keyed by ``seed``."""
    out = np.empty(stop - start, dtype=np.int64)
    b0, b1 = start // BLOCK, (stop - 1) // BLOCK
    for b in range(b0, b1 + 1):
        w = geometric_weights(_block_rng(seed, b), t, (BLOCK, M, N))
        lo, hi = max(start, b * BLOCK), min(stop, (b + 1) * BLOCK)
        g = _lpp_block(w[lo - b * BLOCK:hi - b * BLOCK])
        out[lo - start:hi - start] = g
    return out


def sample_g(t: float, M: int, N: int, seed: int, count: int,
             budget: int = DEFAULT_BUDGET) -> SampleBatch:
    _check_grid(t, M, N)
    if count < 1:
        raise ValueError("count must be >= 1")
    if M * N * count > budget:
        raise ResourceGuardError(
            f"M*N*count = {M * N * count} exceeds the budget {budget}")
    vals = sample_range(t, M, N, int(seed), 0, count)
    return SampleBatch(seed=int(seed), count=count, values=vals, M=M, N=N, t=t)


def empirical_cdf(batch: SampleBatch, n: int) -> float:
    if batch.count < 1:
        raise ValueError("empty batch")
    return float(np.count_nonzero(batch.values <= n)) / batch.count


ORACLE_MAX_M, ORACLE_MAX_N, ORACLE_MAX_N_LEVEL = 4, 8, 12


def exact_cdf_small(t: float, M: int, N: int, n_max: int) -> ExactSmallTable:
    """Exact ``P(G(M,N) <= n)`` for ``n = 0..n_max`` on a tiny grid.

    The state is the column profile ``(G(1,j), ..., G(M,j))``, which is
    nondecreasing in the row index.  Values above ``n_max`` are lumped into
    one absorbing level, which is harmless because the profile only grows.
    """
    _check_grid(t, M, N)
    if M > ORACLE_MAX_M or N > ORACLE_MAX_N or not (0 <= n_max <= ORACLE_MAX_N_LEVEL):
        raise OracleGuardError(
            f"oracle needs M <= {ORACLE_MAX_M}, N <= {ORACLE_MAX_N}, "
            f"0 <= n_max <= {ORACLE_MAX_N_LEVEL}; got M={M}, N={N}, n_max={n_max}")
    cap = n_max + 1
    L = cap + 1
    q = t * t
    # weight law truncated at cap, the last entry holding P(w >= cap)
    pw = np.array([(1 - q) * q**k for k in range(cap)] + [q**cap])

    prob = np.zeros((L,) * M)
    prob[(0,) * M] = 1.0          # column 0 is identically zero
    grids = np.indices((L,) * M)
    for _ in range(N):
        # update rows top to bottom, replacing coordinate i by
        # min(cap, max(new_{i-1}, old_i) + w)
        for i in range(M):
            base = grids[i] if i == 0 else np.maximum(grids[i - 1], grids[i])
            new = np.zeros_like(prob)
            flat_base = base.ravel()
            for w in range(L):
                val = np.minimum(flat_base + w, cap)
                idx = list(grids.reshape(M, -1))
                idx[i] = val
                np.add.at(new, tuple(idx), prob.ravel() * pw[w])
            prob = new
    last = grids[M - 1]
    cdf = {}
    for n in range(n_max + 1):
        cdf[n] = float(prob[last <= n].sum())
    return ExactSmallTable(t=t, M=M, N=N, n_max=n_max, cdf=cdf)
