import json
import math

import pytest
from hypothesis import given, strategies as st

from lpp_tails.asymptotics import (compare_y21, default_l0, md_exponent, moment_stability,
                                   predict_log_y21, scaled_moment, tail_log_ratio,
                                   tail_window, tw_left_tail_log, tw_right_tail_log)
from lpp_tails.core import ModelParams, scaling_constants
from lpp_tails.toeplitz import SymbolSpec, cached_table

P = ModelParams(0.5, 1.0)


def test_prediction_near_a0_vanishes():
    a0 = scaling_constants(P).a0
    pr = predict_log_y21(100, a0, P)
    assert abs(pr.predicted_log_y21) < 1e-10
    assert pr.sin_half_theta == pytest.approx(1, abs=1e-12)


def test_prediction_at_06():
    pr = predict_log_y21(100, 0.6, P)
    assert pr.quadratic_surrogate == pytest.approx(-1 / 3, rel=1e-12)
    assert pr.predicted_log_y21 == pytest.approx(100 * pr.delta + math.log(pr.sin_half_theta))
    assert 0 < pr.sin_half_theta <= 1 and pr.predicted_log_y21 < 0


def test_prediction_minus_surrogate_scales_with_k():
    d = [abs(predict_log_y21(k, 0.6, P).predicted_log_y21
             - predict_log_y21(k, 0.6, P).quadratic_surrogate) / k for k in (100, 1000, 10000)]
    assert max(d) < 2 * min(d) + 1e-3


def test_compare_small_and_doubling():
    r1 = compare_y21(0.5, 1.0, 60, 60, [100]).rows[0]
    r2 = compare_y21(0.5, 1.0, 120, 120, [200]).rows[0]
    assert r1["rel_err"] < 0.2
    assert r2["rel_err"] < r1["rel_err"]


def test_compare_flags_and_serialisation():
    rep = compare_y21(0.5, 1.0, 20, 20, [30, 40, 60])
    rows = {r["k"]: r for r in rep.rows}
    assert rows[40]["flag"].startswith("excluded") and rows[40]["predicted"] is None
    assert rows[60]["flag"].startswith("excluded")
    assert rows[30]["predicted"] is not None
    assert [r["k"] for r in rep.rows] == sorted(rows)
    js = json.loads(rep.to_json())
    assert js["metadata"]["N"] == 20 and len(js["rows"]) == 3
    assert rep.to_csv().splitlines()[0].startswith("k,a,exact")


def test_md_and_tw_formulas():
    assert md_exponent(1) == pytest.approx(-1 / 12)
    assert md_exponent(2) == pytest.approx(-2 / 3)
    assert md_exponent(0) == 0
    assert tw_left_tail_log(-2) == pytest.approx(-2 / 3)
    assert tw_right_tail_log(1) == pytest.approx(-4 / 3 - math.log(16 * math.pi))
    assert abs(tw_left_tail_log(-1)) == abs(md_exponent(1))
    with pytest.raises(ValueError):
        tw_left_tail_log(1)
    with pytest.raises(ValueError):
        tw_right_tail_log(-1)


def test_tail_value_and_telescoping():
    w = tail_window(0.5, 1.0, 216, 3.0)
    assert w.value == pytest.approx(-2.25, rel=0.4)
    tab = cached_table(SymbolSpec(0.5, 216, 216))
    assert w.value == pytest.approx(tab.log_cdf(w.n) - tab.log_cdf(w.b), abs=1e-10)
    # bit-identical to summing the y21 sequence
    s = math.fsum(tab.log_y21(k) for k in range(w.n + 1, w.b + 1))
    assert w.value == s
    assert tail_log_ratio(0.5, 1.0, 216, 3.0) == w.value


def test_empty_window():
    c = scaling_constants(P)
    x = default_l0(P) / (c.a0 ** (4 / 3) * c.b0)        # puts n on b
    w = tail_window(0.5, 1.0, 125, x)
    assert w.n >= w.b and w.value == 0.0
    assert w.warnings                                   # x below L


@given(st.floats(2.0, 4.0))
def test_tail_window_bounds(x):
    w = tail_window(0.5, 1.0, 64, x)
    assert w.n < w.b and w.value < 0


def test_moments():
    assert scaled_moment(0.5, 1.0, 64, 0) == pytest.approx(1, abs=1e-12)
    rep1 = moment_stability(0.5, 1.0, [64, 128, 256], 1)
    e = [r["moment"] for r in rep1.rows]
    assert abs(e[2] - e[1]) < abs(e[1] - e[0]) + 0.05
    rep2 = moment_stability(0.5, 1.0, [64, 128, 256], 2)
    assert all(0.5 < r["moment"] < 10 for r in rep2.rows)
    with pytest.raises(ValueError):
        moment_stability(0.5, 1.0, [128, 64], 1)
    with pytest.raises(ValueError):
        moment_stability(0.5, 1.0, [64], 5)
