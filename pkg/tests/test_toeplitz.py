import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lpp_tails.percolation import exact_cdf_small
from lpp_tails.toeplitz import (NonPositiveDeterminant, SymbolSpec, build_table, log_cdf,
                                log_cdf_det, ratio_sequence, symbol_coefficient,
                                toeplitz_det_log, y21)

# log P(G(3,4) <= n) at t=1/2 by a direct 40-digit mpmath determinant
MP_LOGCDF_3_4 = {3: -0.49351085389114138, 5: -0.11600862493663192, 8: -0.0091786957289112303}


def test_symbol_coefficients_small():
    s = SymbolSpec(0.5, 1, 1)
    assert symbol_coefficient(s, 0) == pytest.approx(1.25)
    assert symbol_coefficient(s, 1) == pytest.approx(0.5)
    assert symbol_coefficient(s, -1) == pytest.approx(0.5)
    assert symbol_coefficient(s, 2) == 0.0
    assert symbol_coefficient(s, -2) == 0.0


@given(st.floats(0.05, 0.95), st.integers(1, 6), st.integers(1, 6))
def test_symbol_matches_polynomial_expansion(t, M, N):
    a = np.polynomial.polynomial.polypow([1, t], M)          # (1+tz)^M
    b = np.polynomial.polynomial.polypow([1, t], N)          # (1+t w)^N, w = 1/z
    s = SymbolSpec(t, M, N)
    for j in range(-N, M + 1):
        direct = sum(a[j + k] * b[k] for k in range(N + 1) if 0 <= j + k <= M)
        assert symbol_coefficient(s, j) == pytest.approx(direct, rel=1e-12)


def test_hand_ratios():
    r = ratio_sequence(SymbolSpec(0.5, 1, 1))
    assert r[0] == pytest.approx(1.25, rel=1e-14)
    assert r[1] == pytest.approx(1.05, rel=1e-14)
    assert abs(r[-1] - 1) < 1e-12


def test_hand_determinants():
    s = SymbolSpec(0.5, 1, 1)
    assert toeplitz_det_log(s, 0) == 0.0
    assert toeplitz_det_log(s, 1) == pytest.approx(math.log(1.25), abs=1e-15)
    assert toeplitz_det_log(s, 2) == pytest.approx(math.log(1.3125), abs=1e-15)


def test_hand_y21():
    s = SymbolSpec(0.5, 1, 1)
    assert y21(s, 1) == pytest.approx(0.8, rel=1e-14)
    assert y21(s, 2) == pytest.approx(1 / 1.05, rel=1e-14)
    vals = [y21(s, k) for k in range(1, 30)]
    assert all(0 < v <= 1 for v in vals)
    assert all(np.diff(vals) >= -1e-16)
    with pytest.raises(ValueError):
        y21(s, 0)


@pytest.mark.parametrize("t", [0.3, 0.5, 0.7])
def test_geometric_case(t):
    tab = build_table(SymbolSpec(t, 1, 1))
    for n in range(11):
        assert math.exp(tab.log_cdf(n)) == pytest.approx(1 - t ** (2 * (n + 1)), abs=1e-12)


def test_against_mpmath_determinant():
    s = SymbolSpec(0.5, 3, 4)
    for n, ref in MP_LOGCDF_3_4.items():
        assert log_cdf(s, n) == pytest.approx(ref, abs=1e-13)
        assert log_cdf_det(s, n) == pytest.approx(ref, abs=1e-13)


def test_zero_level():
    for t, M, N in [(0.3, 2, 5), (0.6, 7, 3)]:
        assert log_cdf(SymbolSpec(t, M, N), 0) == pytest.approx(M * N * math.log(1 - t * t), rel=1e-12)


@pytest.mark.parametrize("t", [0.3, 0.6])
@pytest.mark.parametrize("M", [1, 2, 3])
@pytest.mark.parametrize("N", [1, 2, 3])
def test_oracle(t, M, N):
    tab = build_table(SymbolSpec(t, M, N))
    ora = exact_cdf_small(t, M, N, 6)
    for n in range(7):
        assert tab.log_cdf(n) == pytest.approx(math.log(ora(n)), abs=1e-10)


@pytest.mark.parametrize("t", [0.3, 0.5, 0.7])
@pytest.mark.parametrize("M,N", [(8, 8), (5, 20), (32, 32), (32, 9)])
def test_route_equivalence(t, M, N):
    s = SymbolSpec(t, M, N)
    tab = build_table(s)
    for n in (1, 5, 17, 40, 64):
        det = log_cdf_det(s, n)
        assert math.exp(tab.log_cdf(n)) == pytest.approx(math.exp(det), rel=1e-8)


@given(st.sampled_from([0.3, 0.5, 0.7]), st.integers(1, 12), st.integers(1, 12))
def test_transpose_symmetry(t, M, N):
    a, b = build_table(SymbolSpec(t, M, N)), build_table(SymbolSpec(t, N, M))
    for n in range(0, 3 * (M + N)):
        assert a.log_cdf(n) == pytest.approx(b.log_cdf(n), abs=1e-10)


@given(st.floats(0.1, 0.9), st.integers(1, 15), st.integers(1, 15))
def test_table_invariants(t, M, N):
    tab = build_table(SymbolSpec(t, M, N))
    assert np.all(tab.log_ratios >= -1e-15)
    lc = tab.log_cdf_array()
    assert np.all(lc <= 1e-15)
    assert np.all(np.diff(lc) >= -1e-13)
    assert tab.truncated_ok


def test_ill_conditioned_extended_precision():
    # symbol range (1.7/0.3)^128 defeats doubles; the fixed-point route must agree with LU
    s = SymbolSpec(0.7, 64, 64)
    tab = build_table(s)
    assert tab.method.startswith("levinson-fixed")
    for n in (20, 60):
        assert tab.log_cdf(n) == pytest.approx(log_cdf_det(s, n), abs=1e-10)


def test_fixed_point_beats_double():
    s = SymbolSpec(0.5, 6, 6)          # about 19 bits of cancellation
    ref = log_cdf_det(s, 10)
    assert build_table(s, precision=256).log_cdf(10) == pytest.approx(ref, abs=1e-14)
    assert build_table(s, precision="double").log_cdf(10) == pytest.approx(ref, abs=1e-9)


def test_det_limits():
    s = SymbolSpec(0.5, 2, 2)
    with pytest.raises(ValueError):
        toeplitz_det_log(s, -1)
    with pytest.raises(ValueError):
        toeplitz_det_log(s, 50, max_n=10)
    assert issubclass(NonPositiveDeterminant, RuntimeError)
