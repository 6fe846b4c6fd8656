"""Exact law of G(M, N) from Toeplitz determinants.

``P(G(M,N) <= n) = (1 - t^2)^(MN) D_n`` where ``D_n = det(phi_{j-k})`` for the
symbol ``phi(z) = (1 + t z)^M (1 + t/z)^N``.  The determinants overflow doubles
long before they become interesting, so everything here is carried in logs.

The main engine is a two-sided Levinson recursion.  It produces the
prediction-error ratios ``N_k = D_{k+1}/D_k`` through the increments
``Delta_k = log(N_{k+1}/N_k) = log(1 - rho_k sigma_k)``.  Because ``N_k -> 1``,
``log N_k`` is recovered as the tail sum ``-sum_{j >= k} Delta_j``; this never
subtracts two large logarithms, which keeps the upper tail of the CDF accurate
to a few ulps.
"""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
import scipy.linalg
from scipy.special import gammaln, logsumexp

log = logging.getLogger(__name__)

DEFAULT_EPS = 1e-14
LU_MAX_N = 2048
# doubles keep ~52 bits; allow this many to go to cancellation
DOUBLE_LOSS_LIMIT = 12.0


class ToeplitzError(RuntimeError):
    pass


class BreakdownError(ToeplitzError):
    """Levinson hit a (numerically) singular leading block."""


class NonPositiveDeterminant(ToeplitzError):
    pass


@dataclass(frozen=True)
class SymbolSpec:
    t: float
    M: int
    N: int

    def __post_init__(self):
        if not (0.0 < self.t < 1.0):
            raise ValueError(f"t must lie in (0, 1), got {self.t!r}")
        if self.M < 1 or self.N < 1:
            raise ValueError(f"M, N must be >= 1, got {(self.M, self.N)!r}")

    @property
    def log_z(self) -> float:
        """``log Z_{M,N} = -MN log(1 - t^2)``."""
        return -self.M * self.N * math.log1p(-self.t * self.t)

    def default_kmax(self, eps: float = DEFAULT_EPS) -> int:
        # 4(M+N) covers the bulk; the extra term covers the geometric upper tail
        # of small grids, where P(G > k) ~ t^(2k).
        extra = math.ceil(2.0 * math.log(eps) / math.log(self.t * self.t))
        return 4 * (self.M + self.N) + extra + 16


def log_symbol_coefficients(spec: SymbolSpec) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(j, log phi_j)`` for ``j = -N..M``.

    ``phi_j = sum_k C(M, j+k) C(N, k) t^(j+2k)``; every term is positive so the
    sum is done by log-sum-exp over log-binomials.
    """
    M, N, lt = spec.M, spec.N, math.log(spec.t)
    js = np.arange(-N, M + 1)
    out = np.empty(js.size)
    lgM, lgN = gammaln(M + 1.0), gammaln(N + 1.0)
    for i, j in enumerate(js):
        k = np.arange(max(0, -j), min(N, M - j) + 1, dtype=float)
        terms = (lgM - gammaln(j + k + 1.0) - gammaln(M - j - k + 1.0)
                 + lgN - gammaln(k + 1.0) - gammaln(N - k + 1.0)
                 + (j + 2.0 * k) * lt)
        out[i] = logsumexp(terms)
    return js, out


def symbol_coefficient(spec: SymbolSpec, j: int) -> float:
    """Fourier coefficient ``phi_j``; zero outside ``[-N, M]``."""
    if j > spec.M or j < -spec.N:
        return 0.0
    M, N, t = spec.M, spec.N, spec.t
    k0 = max(0, -j)
    # first term C(M, j+k0) C(N, k0) t^(j+2k0), then ratio recursion
    term = math.comb(M, j + k0) * math.comb(N, k0) * t ** (j + 2 * k0)
    if not math.isfinite(term) or M + N > 500:
        js, lphi = log_symbol_coefficients(spec)
        return math.exp(lphi[j + N])
    total = 0.0
    k = k0
    while j + k <= M and k <= N:
        total += term
        term *= (M - j - k) / (j + k + 1) * (N - k) / (k + 1) * t * t
        k += 1
    return total


def _scaled_symbol(spec: SymbolSpec) -> tuple[np.ndarray, float]:
    """``psi_j = phi_j / s`` stored at index ``j + N``, and ``log s``."""
    _, lphi = log_symbol_coefficients(spec)
    log_s = float(lphi.max())
    return np.exp(lphi - log_s), log_s


@dataclass
class DistributionTable:
    """Ratio sequence and log-CDF for one symbol.

    ``log_ratios[k] = log N_k``, ``k = 0..k_max``.  ``increments[k]`` is
    ``log N_{k+1} - log N_k`` as produced by the recursion.
    """

    spec: SymbolSpec
    log_ratios: np.ndarray
    increments: np.ndarray
    k_max: int
    truncation_eps: float
    tail_residual: float
    closure_error: float
    method: str = "levinson"
    warnings: list[str] = field(default_factory=list)

    @property
    def ratios(self) -> np.ndarray:
        return np.exp(self.log_ratios)

    @property
    def truncated_ok(self) -> bool:
        return abs(self.tail_residual) < self.truncation_eps

    def log_cdf(self, n: int) -> float:
        """``log P(G <= n) = -sum_{k >= n} log N_k``."""
        if n < 0:
            return -math.inf
        if n > self.k_max:
            return 0.0
        return -math.fsum(self.log_ratios[n:])

    def log_cdf_array(self, n_max: int | None = None) -> np.ndarray:
        n_max = self.k_max if n_max is None else n_max
        tail = np.cumsum(self.log_ratios[::-1])[::-1]
        out = np.zeros(n_max + 1)
        m = min(n_max, self.k_max) + 1
        out[:m] = -tail[:m]
        return out

    def log_y21(self, k: int) -> float:
        """``log(-Y21(0; k)) = -log N_{k-1}``."""
        if k < 1:
            raise ValueError("k must be >= 1")
        if k - 1 > self.k_max:
            return 0.0
        return -float(self.log_ratios[k - 1])

    def to_dict(self) -> dict:
        return {
            "t": self.spec.t, "M": self.spec.M, "N": self.spec.N,
            "k_max": self.k_max, "truncation_eps": self.truncation_eps,
            "tail_residual": self.tail_residual,
            "closure_error": self.closure_error,
            "method": self.method, "warnings": list(self.warnings),
        }


def loss_bits(spec: SymbolSpec) -> float:
    """log2 of the symbol's dynamic range on the unit circle.

    Roughly the number of bits a Levinson step can lose to cancellation.
    """
    t = spec.t
    return (spec.M + spec.N) * math.log2((1.0 + t) / (1.0 - t))


def working_bits(spec: SymbolSpec) -> int:
    """Fixed-point precision used when doubles are not enough."""
    t = spec.t
    scale_bits = (spec.M + spec.N) * math.log2(1.0 + t)
    return int(math.ceil(loss_bits(spec) + scale_bits)) + 128


def _stop(incs: list[float], eps: float) -> float | None:
    """Tail estimate once increments are negligible and decaying, else None."""
    if len(incs) < 3 or abs(incs[-1]) >= 1e-3 * eps:
        return None
    prev = incs[-2]
    ratio = incs[-1] / prev if prev != 0.0 else 0.0
    if 0.0 <= ratio < 1.0:
        return incs[-1] * ratio / (1.0 - ratio)
    return None


def _levinson_double(psi: np.ndarray, N: int, k_max: int, eps: float,
                     breakdown_tol: float = 1e-13) -> tuple[np.ndarray, float]:
    """Two-sided Levinson recursion in doubles on the scaled symbol.

    Returns the increments ``Delta_0..Delta_{K-1}`` and an estimate of the
    neglected tail ``sum_{j >= K} Delta_j``.
    """
    M = psi.size - 1 - N
    width = k_max + 2
    # neg[m] = psi_{-1-m}, pos[m] = psi_m
    neg = np.zeros(width)
    pos = np.zeros(width + 1)
    neg[:min(width, N)] = psi[N - 1::-1][:width] if N > 0 else 0.0
    pos[:min(width + 1, M + 1)] = psi[N:][:width + 1]

    c = np.zeros(width)
    d = np.zeros(width)
    c[0] = d[0] = 1.0
    e = psi[N]
    incs: list[float] = []
    tail = 0.0
    for k in range(k_max):
        lam = float(np.dot(neg[:k + 1], c[:k + 1]))
        mu = float(np.dot(pos[k + 1:0:-1], d[:k + 1]))
        rho, sig = lam / e, mu / e
        prod = rho * sig
        if not math.isfinite(prod) or 1.0 - prod < breakdown_tol:
            raise BreakdownError(f"Levinson breakdown at k={k} (rho*sigma={prod!r})")
        c_old = c[:k + 1].copy()
        c[1:k + 2] = c_old
        c[0] = 0.0
        c[:k + 1] -= rho * d[:k + 1]
        d[1:k + 2] -= sig * c_old
        incs.append(math.log1p(-prod))
        e *= 1.0 - prod
        est = _stop(incs, eps)
        if est is not None:
            tail = est
            break
    return np.asarray(incs), tail


def _symbol_fixed(spec: SymbolSpec, P: int) -> tuple[list[int], int]:
    """``psi_j = phi_j / 2^sh`` as integers scaled by ``2^P``, j = -N..M.

    Powers of ``t`` are carried in fixed point with enough guard bits that the
    binomial weights (at most ``2^(M+N)``) cannot amplify truncation error past
    ``2^-P``.
    """
    M, N, t = spec.M, spec.N, spec.t
    _, lphi = log_symbol_coefficients(spec)
    sh = int(math.floor(float(lphi.max()) / math.log(2.0)))
    W = P - sh + M + N + 64
    mant, expo = math.frexp(t)
    m = int(mant * (1 << 53))
    e2 = 53 - expo                     # t = m / 2^e2 exactly
    tW = (m << W) >> e2 if W >= e2 else m >> (e2 - W)
    top = M + N + 1
    pw = [1 << W]
    for _ in range(top):
        pw.append((pw[-1] * tW) >> W)
    cm = [math.comb(M, i) for i in range(M + 1)]
    cn = [math.comb(N, i) for i in range(N + 1)]
    shift = W - (P - sh)
    out = []
    for j in range(-N, M + 1):
        acc = 0
        for k in range(max(0, -j), min(N, M - j) + 1):
            acc += cm[j + k] * cn[k] * pw[j + 2 * k]
        out.append(acc >> shift)
    return out, sh


def _levinson_fixed(spec: SymbolSpec, k_max: int, eps: float,
                    P: int | None = None) -> tuple[np.ndarray, float, float]:
    """Same recursion in ``P``-bit fixed point on Python integers.

    Returns increments, tail estimate and ``log phi_0`` from the same data.
    """
    P = working_bits(spec) if P is None else P
    psi, sh = _symbol_fixed(spec, P)
    M, N = spec.M, spec.N
    width = k_max + 2

    def coef(j):
        return psi[j + N] if -N <= j <= M else 0

    neg = np.array([coef(-1 - m) for m in range(width)], dtype=object)
    pos = np.array([coef(m) for m in range(width + 1)], dtype=object)
    one = 1 << P
    c = np.array([one], dtype=object)
    d = np.array([one], dtype=object)
    e = coef(0)
    log_phi0 = math.log(int(e)) + (sh - P) * math.log(2.0)
    zero = np.array([0], dtype=object)
    incs: list[float] = []
    tail = 0.0
    for k in range(k_max):
        lam = int(np.dot(neg[:k + 1], c)) >> P
        mu = int(np.dot(pos[k + 1:0:-1], d)) >> P
        rho = (lam << P) // e
        sig = (mu << P) // e
        rm = (rho * mu) >> P
        e_new = e - rm
        if e_new <= 0:
            raise BreakdownError(f"fixed-point Levinson breakdown at k={k} (P={P})")
        c, d = (np.concatenate([zero, c]) - ((rho * np.concatenate([d, zero])) >> P),
                np.concatenate([d, zero]) - ((sig * np.concatenate([zero, c])) >> P))
        incs.append(math.log1p(-(int(rm) / int(e))))
        e = e_new
        est = _stop(incs, eps)
        if est is not None:
            tail = est
            break
    return np.asarray(incs), tail, log_phi0


def _table_from_increments(spec, incs, tail_est, log_phi0, eps, method, warnings):
    K = incs.size
    # log N_k = -sum_{j >= k} Delta_j, k = 0..K
    tails = np.concatenate([np.cumsum(incs[::-1])[::-1], [0.0]]) + tail_est
    log_ratios = -tails
    closure = float(log_ratios[0] - log_phi0)
    tail_residual = float(log_ratios[-1])
    if abs(tail_residual) >= eps:
        msg = (f"ratio sequence truncated at k_max={K} with |log N_kmax| = "
               f"{abs(tail_residual):.3g} >= eps={eps:g}")
        log.warning(msg)
        warnings.append(msg)
    return DistributionTable(spec=spec, log_ratios=log_ratios, increments=incs,
                             k_max=K, truncation_eps=eps,
                             tail_residual=tail_residual, closure_error=closure,
                             method=method, warnings=warnings)


def build_table(spec: SymbolSpec, eps: float = DEFAULT_EPS,
                k_max: int | None = None, precision: str | int = "auto") -> DistributionTable:
    """Compute ``log N_k`` for ``k = 0..k_max`` and the log-CDF.

    ``precision`` is ``"double"``, ``"auto"`` or an explicit number of
    fixed-point bits.  ``"auto"`` uses doubles only while the symbol's dynamic
    range costs fewer than :data:`DOUBLE_LOSS_LIMIT` bits.  A breakdown of the
    double recursion falls back to LU ratios.
    """
    k_max = spec.default_kmax(eps) if k_max is None else k_max
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    use_double = precision == "double" or (
        precision == "auto" and loss_bits(spec) <= DOUBLE_LOSS_LIMIT)
    if not use_double:
        P = None if precision == "auto" else int(precision)
        incs, tail_est, log_phi0 = _levinson_fixed(spec, k_max, eps, P)
        method = f"levinson-fixed{working_bits(spec) if P is None else P}"
        return _table_from_increments(spec, incs, tail_est, log_phi0, eps, method, [])
    psi, log_s = _scaled_symbol(spec)
    log_phi0 = float(np.log(psi[spec.N])) + log_s
    try:
        incs, tail_est = _levinson_double(psi, spec.N, k_max, eps)
        return _table_from_increments(spec, incs, tail_est, log_phi0, eps,
                                      "levinson", [])
    except BreakdownError as exc:
        log.warning("%s; falling back to LU", exc)
        n = min(k_max, LU_MAX_N)
        logdets = _lu_logdets(psi, log_s, spec.N, n + 1)
        lr = np.diff(logdets)
        incs = np.diff(lr)
        return _table_from_increments(spec, incs, 0.0, log_phi0, eps, "lu",
                                      [f"levinson breakdown: {exc}"])


def ratio_sequence(spec: SymbolSpec, k_max: int | None = None,
                   eps: float = DEFAULT_EPS) -> np.ndarray:
    """``N_k = D_{k+1}/D_k`` for ``k = 0..k_max``."""
    return build_table(spec, eps=eps, k_max=k_max).ratios


def _toeplitz_block(psi: np.ndarray, N: int, n: int) -> np.ndarray:
    M = psi.size - 1 - N
    col = np.array([psi[j + N] if j <= M else 0.0 for j in range(n)])
    row = np.array([psi[-j + N] if j <= N else 0.0 for j in range(n)])
    return scipy.linalg.toeplitz(col, row)


def _lu_logdet(mat: np.ndarray) -> tuple[float, float]:
    lu, piv = scipy.linalg.lu_factor(mat, check_finite=False)
    diag = np.diag(lu)
    swaps = int(np.count_nonzero(piv != np.arange(piv.size)))
    sign = (-1.0) ** swaps * float(np.prod(np.sign(diag)))
    return sign, math.fsum(np.log(np.abs(diag)))


def _lu_logdets(psi, log_s, N, n_max):
    out = np.zeros(n_max + 1)
    for n in range(1, n_max + 1):
        sign, ld = _lu_logdet(_toeplitz_block(psi, N, n))
        if sign <= 0:
            raise NonPositiveDeterminant(f"D_{n} has sign {sign}")
        out[n] = ld + n * log_s
    return out


def _mp_logdet(spec: SymbolSpec, n: int, bits: int) -> tuple[int, float]:
    """Sign and ``log|D_n|`` by mpmath LU at ``bits`` of working precision."""
    M, N = spec.M, spec.N
    with mpmath.workprec(bits):
        t = mpmath.mpf(spec.t)
        coef = {}
        for j in range(max(-N, 1 - n), min(M, n - 1) + 1):
            coef[j] = mpmath.fsum(
                mpmath.binomial(M, j + k) * mpmath.binomial(N, k) * t ** (j + 2 * k)
                for k in range(max(0, -j), min(N, M - j) + 1))
        zero = mpmath.mpf(0)
        A = mpmath.matrix(n, n)
        for i in range(n):
            for j in range(n):
                A[i, j] = coef.get(i - j, zero)
        det = mpmath.det(A)
        if det == 0:
            return 0, -math.inf
        return (1 if det > 0 else -1), float(mpmath.log(abs(det)))


def toeplitz_det_log(spec: SymbolSpec, n: int, max_n: int = LU_MAX_N,
                     precision: str | int = "auto") -> float:
    """``log D_n`` by partially pivoted LU; ``log D_0 = 0``.

    Doubles are used when the symbol is well conditioned, otherwise mpmath at
    :func:`working_bits` (or an explicit bit count).
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return 0.0
    if n > max_n:
        raise ValueError(f"n={n} exceeds the LU limit {max_n}")
    if precision == "double" or (precision == "auto"
                                 and loss_bits(spec) <= DOUBLE_LOSS_LIMIT):
        psi, log_s = _scaled_symbol(spec)
        sign, ld = _lu_logdet(_toeplitz_block(psi, spec.N, n))
        ld += n * log_s
    else:
        bits = working_bits(spec) if precision == "auto" else int(precision)
        sign, ld = _mp_logdet(spec, n, bits)
    if sign <= 0:
        raise NonPositiveDeterminant(
            f"D_{n} computed with sign {sign:+.0f}; determinants here are positive")
    return ld


def log_cdf(spec: SymbolSpec, n: int, table: DistributionTable | None = None) -> float:
    """``log P(G(M,N) <= n)`` from the ratio product."""
    table = build_table(spec) if table is None else table
    return table.log_cdf(n)


def log_cdf_det(spec: SymbolSpec, n: int) -> float:
    """Same quantity through ``D_n / Z`` with an LU determinant."""
    return toeplitz_det_log(spec, n) - spec.log_z


def y21(spec: SymbolSpec, k: int, table: DistributionTable | None = None) -> float:
    """``-Y21(0; k) = 1/N_{k-1} = P(G <= k-1) / P(G <= k)``."""
    table = build_table(spec) if table is None else table
    return math.exp(table.log_y21(k))


@functools.lru_cache(maxsize=16)
def cached_table(spec: SymbolSpec, eps: float = DEFAULT_EPS) -> DistributionTable:
    """Memoised :func:`build_table`; callers must not mutate the result."""
    return build_table(spec, eps=eps)
