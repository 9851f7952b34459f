import math
import os
import subprocess

import numpy as np
import pytest

import twoscale


def test_rhs_matches_hand_values():
    rhs = twoscale.cstr_rhs(np.array([2.5, 0.0, 305.0, 330.0]), np.array([2.0, 0.1]))
    rate = 5e10 * math.exp(-60000.0 / (8.314 * 305.0)) * 2.5
    assert rhs[0] == pytest.approx(-rate, rel=1e-12)
    assert rhs[3] == pytest.approx(0.1 * 25.0 / 0.0494 - 25.0 / (0.1 * 0.0494), rel=1e-12)


def test_steady_state_refinement():
    x, residual, _ = twoscale.refine_steady_state(np.array([1.205, 1.295, 302.3, 302.6]), np.array([2.0, 0.1]))
    assert residual < 1e-9
    assert np.allclose(x, [1.205, 1.295, 302.3, 302.6], rtol=1e-2)


def test_fast_steady_temperature():
    p = twoscale.CstrParams()
    assert twoscale.fast_steady_temperature(p, 305.0, 330.0) == pytest.approx((305 + 0.0494 * 330) / 1.0494)
    p.V_h = 0.2
    assert twoscale.fast_steady_temperature(p, 305.0, 330.0) == pytest.approx(309.16666666666667)


def test_distributed_run_and_metrics(tmp_path):
    cfg = twoscale.load_config(overrides=["schedule.horizon=1.0"], seed=3)
    rec = twoscale.run(cfg, ["distributed", "decentralized"])
    assert rec.truth.shape == (101, 4)
    assert rec.measurements.shape == (101, 2)
    dist = rec.scheme("distributed")
    assert dist.message_count == 101
    assert rec.scheme("decentralized").message_count == 0
    assert dist.mhe_instants == list(range(0, 101, 10))
    rows = twoscale.metrics(rec)
    assert [r["scheme"] for r in rows] == ["distributed", "decentralized"]
    assert all(len(r["sigma"]) == 4 and r["rmse"] >= 0.0 for r in rows)

    path = tmp_path / "run.csv"
    twoscale.export_csv(rec, path)
    back = twoscale.import_csv(path)
    assert np.array_equal(back.truth, rec.truth)
    assert np.array_equal(back.scheme("distributed").estimate, dist.estimate)


def test_indexes_closed_form():
    t = [0.0, 1.0, 2.0]
    truth = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 5.0]])
    assert twoscale.sigma_index(t, 1.1 * truth, truth, 0) == pytest.approx(10.0)
    assert twoscale.rmse_index(t, 1.1 * truth, truth) == pytest.approx(10.0)


def test_decompose_check():
    cfg = twoscale.load_config(default_scenario="decomposition")
    out = twoscale.decompose_check(cfg)
    assert out["rmse"] < 0.5
    assert out["x_fss"][0] == pytest.approx(out["conservation_fss"], rel=1e-9)


def test_unknown_key_rejected():
    with pytest.raises(ValueError, match="unknown key"):
        twoscale.load_config(overrides=["schedule.bogus=1"])


@pytest.mark.skipif("TWOSCALE_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_matches_library(tmp_path):
    cli = os.environ["TWOSCALE_CLI"]
    subprocess.run([cli, "simulate", "--seed", "3", "--set", "schedule.horizon=1.0", "--out", str(tmp_path)],
                   check=True, capture_output=True)
    from_cli = twoscale.import_csv(tmp_path / "simulate.csv")
    rec = twoscale.run(twoscale.load_config(overrides=["schedule.horizon=1.0"], seed=3))
    assert np.array_equal(from_cli.scheme("distributed").estimate, rec.scheme("distributed").estimate)
