import math

import numpy as np
import pytest

cyclordf = pytest.importorskip("cyclordf")

MEMORYLESS = {
    "af": {"kind": "memoryless", "variances": [4]},
    "sampling": {"p": 1, "epsilon": 0, "n": 1},
    "D": 1,
    "grid": {"freq_nodes": 16},
}


def test_rational_approx():
    assert cyclordf.rational_approx("pi/7", 2, 1)["p_n"] == 2
    r = cyclordf.rational_approx("pi/7", 2, 100)
    assert r["p_n"] == 244
    assert r["epsilon_n"] == pytest.approx(0.44)


def test_rdf_white_one_bit():
    (row,) = cyclordf.rdf(MEMORYLESS)
    assert row["R"] == pytest.approx(1.0, abs=1e-9)
    assert row["theta"] == pytest.approx(1.0)


def test_two_phase_closed_form():
    cfg = {
        "af": {"kind": "memoryless", "variances": [1, 9], "T_c_seconds": 2},
        "sampling": {"p": 2, "epsilon": 0, "n": 1},
        "D": 1,
        "grid": {"freq_nodes": 16},
    }
    (row,) = cyclordf.rdf(cfg)
    assert row["R"] == pytest.approx(math.log2(9) / 4, abs=1e-9)


def test_finite_block_matches_scalar():
    rate, theta, eig = cyclordf.finite_block_rdf(np.diag([4.0, 4.0]), 1.0)
    assert rate == pytest.approx(1.0)
    assert theta == pytest.approx(1.0)
    assert list(eig) == [4.0, 4.0]


def test_sweep_decreasing_in_d():
    cfg = {
        "sampling": {"p": 2, "epsilon": "pi/7", "n": 3},
        "sweep": {"axis": "D", "D_values": [0.1, 0.2, 0.3]},
        "grid": {"freq_nodes": 16},
    }
    (curve,) = cyclordf.sweep(cfg)
    rates = [p["R"] for p in curve["points"]]
    assert rates[0] > rates[1] > rates[2]


def test_gate_numerical_example_fails():
    (g,) = cyclordf.gate({"D": 0.15, "grid": {"gamma_t_grid": 256, "gamma_lag_grid": 256}})
    assert g["verdict"] == "FAIL"
    assert g["result_label"] == "heuristic"


def test_sdd_and_moments():
    assert cyclordf.sdd_min_eig_bound(np.array([[2.0, 0.5], [0.5, 2.0]]))["bound_holds"]
    m = cyclordf.moment_bound_check(np.eye(3), 1.0)
    assert m["mean_d"] == pytest.approx(1.0)


def test_config_errors_raise():
    with pytest.raises(cyclordf.ConfigError):
        cyclordf.rdf({"bogus": 1})
    with pytest.raises(cyclordf.Error):
        cyclordf.rdf({"D": -1})


def test_schema():
    assert "sampling" in cyclordf.config_schema()["properties"]
