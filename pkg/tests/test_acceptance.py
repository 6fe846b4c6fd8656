"""The eleven acceptance criteria, one test each.

Every test prints a single PASS/FAIL line.  Run directly
(``python3 tests/test_acceptance.py``) for the table alone.
"""

import sys

import pytest

from lpp_tails import suites

TIME_LIMITS = {  # seconds
    "scaling_identity": 1, "geometric_closed_form": 1, "oracle_equivalence": 10,
    "monte_carlo": 60, "endpoint_suite": 1, "delta_expansion": 1, "contour_topology": 30,
    "rhp_residuals": 60, "asymptotic_agreement": 300, "moderate_deviation": 600,
    "moment_stabilization": 300,
}


def _report(capsys, idx, res):
    slow = res.seconds > TIME_LIMITS[res.name]
    with capsys.disabled():
        print(f"\n  criterion {idx:2d}: {res.line()}" + ("  [over time budget]" if slow else ""))
    return res


def test_01_scaling_identity(capsys):
    r = _report(capsys, 1, suites.scaling_identity())
    assert r.value < 1e-12


def test_02_geometric_closed_form(capsys):
    r = _report(capsys, 2, suites.geometric_closed_form())
    assert r.value < 1e-12


def test_03_oracle_equivalence(capsys):
    r = _report(capsys, 3, suites.oracle_equivalence())
    assert r.value < 1e-10


def test_04_monte_carlo(capsys):
    r = _report(capsys, 4, suites.monte_carlo())
    assert r.value <= 4.0


def test_05_endpoint_suite(capsys):
    r = _report(capsys, 5, suites.endpoint_suite())
    assert r.detail["max_abs_H"] < 1e-12
    assert not r.detail["invariant_failures"]
    assert r.detail["slope_rel_err"] < 1e-4


def test_06_delta_expansion(capsys):
    r = _report(capsys, 6, suites.delta_expansion())
    assert r.detail["max_abs_delta_a0"] < 1e-12
    assert r.detail["second_diff_rel_err"] < 1e-3


def test_07_contour_topology(capsys):
    r = _report(capsys, 7, suites.contour_topology())
    d = r.detail
    assert d["p_i"] > 0
    assert d["z0_miss"] < 1e-6
    assert d["conjugation"] < 1e-8
    assert d["real_period"] < 1e-6


def test_08_rhp_residuals(capsys):
    r = _report(capsys, 8, suites.rhp_residuals(count=200))
    for name in ("a_jump_sum", "c_sign", "d_sign", "g_jump_3", "psi2_5",
                 "endpoint_int_0", "endpoint_int_1"):
        assert r.detail[name] < 1e-6, name
    assert r.detail["min_sign_margin"] > 0


def test_09_asymptotic_agreement(capsys):
    r = _report(capsys, 9, suites.asymptotic_agreement())
    assert r.detail["rel_err_k400"] < r.detail["rel_err_k100"]
    assert r.detail["rel_err_k400"] < 0.1


def test_10_moderate_deviation(capsys):
    r = _report(capsys, 10, suites.moderate_deviation())
    ratios = r.detail["ratios"]
    assert 0.6 <= ratios[216] <= 1.4
    assert suites.trend_toward_one([ratios[N] for N in (125, 216, 512)])
    assert r.detail["telescoping"] < 1e-10


def test_11_moment_stabilization(capsys):
    r = _report(capsys, 11, suites.moment_stabilization())
    assert r.value < 0.25


if __name__ == "__main__":
    failed = 0
    for i, chk in enumerate(suites.ACCEPTANCE, 1):
        res = chk()
        print(f"criterion {i:2d}: {res.line()}")
        failed += not res.passed
    sys.exit(1 if failed else 0)
