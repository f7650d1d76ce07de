import csv

import numpy as np
import pytest

from nschsim.cli import run
from nschsim.grid import Grid
from nschsim.invariants import DEGIORGI_HEADER, DIAGNOSTICS_HEADER
from nschsim.io import read_field, write_field
from nschsim.runner import SWEEP_HEADER

SMALL = ["--set", "domain.cells=[32]", "--set", "time.t_end=0.05", "--set", "time.dt=5e-3"]


def header(path):
    with open(path, newline="") as fh:
        return next(csv.reader(fh))


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))[1:]


def test_simulate_outputs(tmp_path):
    out = tmp_path / "run"
    assert run(["simulate", "-o", str(out), *SMALL, "--probe-window", "0.02"]) == 0
    assert header(out / "diagnostics.csv") == DIAGNOSTICS_HEADER
    assert len(rows(out / "diagnostics.csv")) == 11
    for name in ("config.yaml", "mu_final.txt", "rho_final.txt", "omega_probe.csv",
                 "diagnostics.png", "fields.png"):
        assert (out / name).exists(), name
    assert (out / "snapshots" / "mu_00000000.txt").exists()
    g, mu, t, _ = read_field(out / "mu_final.txt")
    assert g == Grid((32,), (1.0,)) and t == pytest.approx(0.05)


def test_config_round_trip_bit_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(["simulate", "-o", str(a), "--no-plots", *SMALL, "--set", "init.type=random"]) == 0
    assert run(["simulate", "-c", str(a / "config.yaml"), "-o", str(b), "--no-plots"]) == 0
    assert (a / "diagnostics.csv").read_bytes() == (b / "diagnostics.csv").read_bytes()
    assert (a / "rho_final.txt").read_bytes() == (b / "rho_final.txt").read_bytes()


def test_negative_mu0_rejected(tmp_path, caplog):
    g = Grid((32,), (1.0,))
    mu = g.full(1.0)
    mu[5] = -0.25
    write_field(tmp_path / "mu.txt", g, mu, 0.0, "mu")
    write_field(tmp_path / "rho.txt", g, g.full(0.5), 0.0, "rho")
    code = run(["simulate", "-o", str(tmp_path / "o"), "--no-plots", *SMALL, "--set", "init.type=file",
                "--set", f"init.mu_file={tmp_path / 'mu.txt'}", "--set", f"init.rho_file={tmp_path / 'rho.txt'}"])
    assert code == 1
    assert "mu0 >= 0" in caplog.text


def test_unknown_key_rejected(tmp_path):
    assert run(["simulate", "-o", str(tmp_path), "--set", "model.kappa=1"]) == 1


def test_bad_rho0_rejected(tmp_path):
    assert run(["simulate", "-o", str(tmp_path), "--no-plots", *SMALL,
                "--set", "init.type=constant", "--set", "init.rho0=1.0"]) == 1


def test_solver_failure_exit_code(tmp_path):
    out = tmp_path / "f"
    code = run(["simulate", "-o", str(out), "--no-plots", "--set", "domain.cells=[32]",
                "--set", "time.dt=0.5", "--set", "time.t_end=5", "--set", "solver.lambda=1e-3",
                "--set", "solver.newton_max_iter=1", "--set", "init.amplitude=0.9"])
    assert code == 2
    assert (out / "rho_final.txt").exists()


def test_verify_stationary(tmp_path, capsys):
    out = tmp_path / "v"
    assert run(["verify", "--case", "stationary", "-o", str(out), *SMALL, "--set", "init.mu0=0.3",
                "--set", "init.rho0=0.9"]) == 0
    text = capsys.readouterr().out
    assert "FAIL" not in text and "PASS stationarity" in text
    for r in rows(out / "diagnostics.csv"):
        rec = dict(zip(DIAGNOSTICS_HEADER, map(float, r)))
        assert rec["conservation_drift"] < 1e-12 and rec["lyapunov_residual"] < 1e-12
        assert rec["grad_mu_l2"] < 1e-12 and rec["mu_oscillation"] < 1e-12
    assert header(out / "degiorgi.csv") == DEGIORGI_HEADER


def test_verify_homogeneous(tmp_path):
    out = tmp_path / "h"
    args = ["verify", "--case", "homogeneous", "--no-plots", "--set", "domain.cells=[8]",
            "--set", "init.mu0=2", "--set", "init.rho0=0.3", "--set", "time.t_end=0.2"]
    assert run([*args, "-o", str(out), "--set", "time.dt=1e-4"]) == 0
    assert header(out / "oracle.csv") == ["t", "mu", "rho", "invariant"]
    assert run([*args, "-o", str(tmp_path / "huge"), "--set", "time.dt=0.1"]) == 3


def test_sweep_dt(tmp_path):
    out = tmp_path / "s"
    assert run(["sweep", "--axis", "time.dt", "--values", "4e-3,2e-3,1e-3", "-o", str(out),
                "--set", "domain.cells=[32]", "--set", "time.t_end=0.2", "--set", "init.amplitude=0.5"]) == 0
    assert header(out / "sweep.csv") == SWEEP_HEADER
    data = [dict(zip(SWEEP_HEADER, r)) for r in rows(out / "sweep.csv")]
    assert [d["status"] for d in data] == ["ok"] * 3
    for d in data[1:]:
        assert 1.7 < float(d["drift_ratio"]) < 2.3
    assert (out / "sweep.png").exists()


def test_sweep_cells(tmp_path):
    out = tmp_path / "c"
    assert run(["sweep", "--axis", "domain.cells", "--values", "16,32,64", "-o", str(out), "--no-plots",
                "--set", "time.t_end=0.01", "--set", "time.dt=5e-3"]) == 0
    data = [dict(zip(SWEEP_HEADER, r)) for r in rows(out / "sweep.csv")]
    for d in data[1:]:
        assert 3.5 < float(d["laplacian_error_ratio"]) < 4.5


def test_steady_command(tmp_path, capsys):
    out = tmp_path / "st"
    assert run(["steady", "--mu-s", "0", "-o", str(out), "--set", "domain.cells=[16]",
                "--set", "init.rho0=0.2"]) == 0
    g, rho, _, name = read_field(out / "rho_s.txt")
    assert name == "rho" and np.allclose(rho, 0.0707201816799447, atol=1e-12)
    assert "residual=" in capsys.readouterr().out
    assert run(["steady", "--mu-s", "0", "-o", str(out), "--init", "file"]) == 1


def test_degiorgi_command(tmp_path):
    out = tmp_path / "d"
    assert run(["degiorgi", "-o", str(out), *SMALL]) == 0
    assert header(out / "degiorgi.csv") == DEGIORGI_HEADER
    k = [float(r[1]) for r in rows(out / "degiorgi.csv")]
    M = k[0]
    assert k == [M * (2 - 2.0 ** -j) for j in range(len(k))]
    assert (out / "degiorgi.png").exists()


def test_missing_subcommand():
    with pytest.raises(SystemExit):
        run([])
