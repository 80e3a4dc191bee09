import json
import os
import subprocess

import numpy as np
import pytest

import risnull


def test_thresholds():
    assert risnull.round_half_up(risnull.necessary_n_gordon(56, 32.0)) == 163
    assert risnull.round_half_up(risnull.sufficient_n(56, 32.0)) == 391
    rep = risnull.threshold_report(12, 10.0)
    assert rep["n_refined"] == pytest.approx(41.64, rel=1e-3)
    lo, hi = risnull.gordon_bounds_torus(100, 4, 1.0)
    assert lo == pytest.approx(16.455, rel=1e-4)
    assert hi == pytest.approx(23.545, rel=1e-4)
    assert not risnull.antenna_collab_feasible(2, 4, 4)


def test_bad_arguments_raise():
    with pytest.raises(ValueError):
        risnull.necessary_n_gordon(0, 1.0)
    with pytest.raises(risnull.ConfigError):
        risnull.solve_instance({"bogus": 1})


def test_solve_system_surrogate():
    a, b = risnull.surrogate_system(8, 40, 1.0, 1.0, seed=3)
    assert a.shape == (40, 8)
    out = risnull.solve_system(a, b, 1.0, 1.0, seed=4)
    assert out["feasible"]
    v = out["v"]
    assert np.allclose(np.abs(v), 1.0)
    assert np.linalg.norm(a.conj().T @ v + b) == pytest.approx(out["residual"], rel=1e-6)


def test_project_torus():
    v = risnull.project_torus(np.array([3 + 4j, 0j]))
    assert np.allclose(v, [0.6 + 0.8j, 1.0])


def test_instance_and_sweep():
    cfg = {"G": 2, "M": 2, "K": 2, "N": 28, "eta": 0.0, "master_seed": 1}
    rep = risnull.solve_instance(cfg)
    assert rep["L"] == 12
    assert rep["feasible"]

    res = risnull.feasibility_sweep(
        {"G": 2, "M": 2, "K": 2, "n_grid": [8, 48], "eta_grid": [1.0], "trials": 10}, workers=2
    )
    fractions = [p["feasible_fraction"] for p in res["points"]]
    assert fractions[0] == 0.0
    assert fractions[1] == 1.0
    assert risnull.quantile_boundary(res, 0.5) == [(1.0, 48)]


def test_seeds():
    assert risnull.derive_trial_seed(1, 2, 3) == risnull.derive_trial_seed(1, 2, 3)
    assert risnull.derive_trial_seed(1, 2, 3) != risnull.derive_trial_seed(1, 3, 2)


CLI = os.environ.get("RISNULL_CLI")


def run_cli(*args):
    return subprocess.run([CLI, *args], capture_output=True, text=True)


@pytest.mark.skipif(not CLI, reason="RISNULL_CLI not set")
def test_cli_exit_codes(tmp_path):
    ok = run_cli("thresholds", "--set", "M=4", "--set", "K=4", "--set", "eta=32", "--format", "json")
    assert ok.returncode == 0
    row = json.loads(ok.stdout)["rows"][0]
    assert row["n_necessary_gordon_rounded"] == 163
    assert row["n_sufficient_rounded"] == 391

    assert run_cli("thresholds", "--set", "bogus=1").returncode == 1
    assert run_cli("thresholds", "--config", str(tmp_path / "missing.json")).returncode == 2
    assert run_cli("thresholds", "--out", str(tmp_path / "no" / "dir.csv")).returncode == 2

    out = tmp_path / "t.csv"
    assert run_cli("thresholds", "--set", "eta_grid=[0,32]", "--out", str(out)).returncode == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 3
    assert lines[0].startswith("L,eta,")
