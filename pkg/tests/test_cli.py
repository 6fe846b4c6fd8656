import json
import math

import pytest

from lpp_tails.cli import main
from lpp_tails.core import ModelParams, centering


def run(args, tmp_path, monkeypatch):
    monkeypatch.setenv("LPP_TAILS_OUT", str(tmp_path))
    return main(args)


def test_sample_csv_and_determinism(tmp_path, monkeypatch):
    args = ["sample", "--t", "0.5", "--M", "1", "--N", "1", "--count", "100000", "--seed", "7"]
    assert run(args, tmp_path, monkeypatch) == 0
    (f,) = tmp_path.glob("sample_*.csv")
    first = f.read_bytes()
    assert first.splitlines()[0] == b"g,count,empirical_cdf"
    assert run(args, tmp_path, monkeypatch) == 0
    assert f.read_bytes() == first


def test_sample_rejects_bad_t(tmp_path, monkeypatch, capsys):
    assert run(["sample", "--t", "1.5", "--M", "1", "--N", "1", "--count", "10"],
               tmp_path, monkeypatch) == 2
    assert "0 < t < 1" in capsys.readouterr().err


def test_sample_resource_guard(tmp_path, monkeypatch):
    assert run(["sample", "--t", "0.5", "--M", "100", "--N", "100", "--count", "100000"],
               tmp_path, monkeypatch) == 3


def test_exact_geometric(tmp_path, monkeypatch):
    assert run(["exact", "--t", "0.5", "--M", "1", "--N", "1", "--nmax", "10"],
               tmp_path, monkeypatch) == 0
    rows = (tmp_path / "exact_t0.5_M1_N1.csv").read_text().splitlines()[1:]
    for line in rows:
        n, _, cdf, _ = line.split(",")
        assert float(cdf) == pytest.approx(1 - 0.25 ** (int(n) + 1), abs=1e-12)
    meta = json.loads((tmp_path / "exact_t0.5_M1_N1_meta.json").read_text())
    assert "k_max" in meta and meta["truncation_eps"] == 1e-14


def test_exact_formats_agree(tmp_path, monkeypatch):
    base = ["exact", "--t", "0.3", "--M", "2", "--N", "3", "--nmax", "6"]
    assert run(base, tmp_path, monkeypatch) == 0
    assert run(base + ["--format", "json"], tmp_path, monkeypatch) == 0
    csv_rows = (tmp_path / "exact_t0.3_M2_N3.csv").read_text().splitlines()[1:]
    js = json.loads((tmp_path / "exact_t0.3_M2_N3.json").read_text())
    for line, rec in zip(csv_rows, js["rows"]):
        assert [float(v) for v in line.split(",")] == [rec["n"], rec["log_cdf"], rec["cdf"],
                                                       rec["log_ratio"]]
    assert "k_max" in js["metadata"] and "truncation_eps" in js["metadata"]


def test_exact_oracle(tmp_path, monkeypatch):
    assert run(["exact", "--t", "0.3", "--M", "2", "--N", "2", "--nmax", "6", "--check-oracle"],
               tmp_path, monkeypatch) == 0
    assert run(["exact", "--t", "0.3", "--M", "6", "--N", "2", "--nmax", "6", "--check-oracle"],
               tmp_path, monkeypatch) == 2


def test_contours(tmp_path, monkeypatch):
    assert run(["contours", "--t", "0.70710678", "--gamma", "2", "--a", "4"],
               tmp_path, monkeypatch) == 0
    csvs = sorted(tmp_path.glob("contours_*gamma*.csv"))
    assert len(csvs) == 2
    (rep,) = tmp_path.glob("contours_*_report.json")
    r = json.loads(rep.read_text())
    assert r["p_i"] > 0 and r["z0_crossing_residual"] < 1e-6
    assert abs(r["real_period_residual"]) < 1e-6


@pytest.mark.parametrize("a", ["a0", repr(centering(ModelParams(1 / math.sqrt(2), 2.0)))])
def test_contours_at_a0(tmp_path, monkeypatch, capsys, a):
    assert run(["contours", "--t", repr(1 / math.sqrt(2)), "--gamma", "2", "--a", a],
               tmp_path, monkeypatch) == 2
    assert "a must exceed a0" in capsys.readouterr().err


def test_validate_identities(tmp_path, monkeypatch, capsys):
    assert run(["validate", "--suite", "identities"], tmp_path, monkeypatch) == 0
    out = capsys.readouterr().out
    assert out.count("[PASS]") == 5
    rep = json.loads((tmp_path / "validate_identities.json").read_text())
    assert all(r["passed"] for r in rep)


def test_validate_single_tail(tmp_path, monkeypatch, capsys):
    assert run(["validate", "--suite", "tails", "--N", "216", "--x", "3"],
               tmp_path, monkeypatch) == 0
    assert "ratio=" in capsys.readouterr().out


def test_bad_usage(tmp_path, monkeypatch):
    assert run(["frobnicate"], tmp_path, monkeypatch) == 2
    assert run(["exact", "--t", "0.5", "--M", "0", "--N", "1"], tmp_path, monkeypatch) == 2
