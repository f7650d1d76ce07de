import numpy as np
import pytest
import yaml

from nschsim.config import DEFAULTS, RunConfig
from nschsim.errors import ConfigError
from nschsim.grid import Grid
from nschsim.io import read_csv, read_field, write_csv, write_field


@pytest.mark.parametrize("grid", [Grid((7,), (1.5,)), Grid((3, 4), (1.0, 0.25))])
def test_field_round_trip_bit_exact(tmp_path, grid):
    rng = np.random.default_rng(0)
    values = rng.standard_normal(grid.shape) * 10.0 ** rng.integers(-30, 30, grid.shape)
    path = tmp_path / "f.txt"
    write_field(path, grid, values, 0.1 + 0.2, "mu")
    g2, v2, t, name = read_field(path)
    assert g2 == grid and np.array_equal(v2, values) and t == 0.1 + 0.2 and name == "mu"


def test_field_header_format(tmp_path):
    path = tmp_path / "f.txt"
    write_field(path, Grid((2, 3), (1.0, 2.0)), np.zeros((3, 4)), 0.5, "rho")
    lines = path.read_text().splitlines()
    assert lines[0] == "# nschsim-field v1 dim=2 cells=2,3 lengths=1,2 t=0.5 name=rho"
    assert len(lines) == 13


def test_malformed_field(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("not a field\n1\n")
    with pytest.raises(ConfigError):
        read_field(path)
    path.write_text("# nschsim-field v1 dim=1 cells=4 lengths=1 t=0 name=mu\n1\n2\n")
    with pytest.raises(ConfigError):
        read_field(path)


def test_csv_round_trip(tmp_path):
    path = tmp_path / "x.csv"
    write_csv(path, ["a", "b"], [[1, 2.5], ["x,y", None]])
    header, rows = read_csv(path)
    assert header == ["a", "b"] and rows == [["1", "2.5"], ["x,y", ""]]


def test_defaults():
    cfg = RunConfig()
    assert cfg.values == RunConfig(DEFAULTS).values
    assert cfg.grid() == Grid((128,), (1.0,))
    sc = cfg.solver_config()
    assert (sc.dt, sc.tau, sc.lam, sc.newton_tol, sc.lin_tol, sc.newton_max_iter) == (1e-3, 0.0, 0.0, 1e-10, 1e-10, 50)
    assert cfg.get("output.snapshot_every") == 100 and cfg.get("output.diagnostics_every") == 1


@pytest.mark.parametrize("values", [
    {"model": {"nope": 1}}, {"extra": {}}, {"time": 3},
    {"domain": {"dim": 3}}, {"domain": {"cells": [10, 10]}},
    {"model": {"eps": 0}}, {"model": {"potential": "quartic"}},
    {"time": {"dt": 1e-3, "tau": 1.5e-3}}, {"time": {"t_end": -1}},
    {"init": {"type": "bogus"}}, {"output": {"snapshot_every": 0}},
    {"time": {"dt": "fast"}}, {"domain": {"cells": [10.5]}},
])
def test_rejected_configs(values):
    with pytest.raises(ConfigError):
        RunConfig(values)


def test_yaml_scientific_strings(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("time:\n  dt: 1e-3\n  tau: 4e-3\nsolver:\n  newton_tol: 1e-12\n")
    cfg = RunConfig.from_file(path)
    assert cfg.get("time.dt") == 1e-3 and cfg.solver_config().lag_steps == 4


def test_missing_or_bad_file(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig.from_file(tmp_path / "absent.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("- just\n- a list\n")
    with pytest.raises(ConfigError):
        RunConfig.from_file(bad)


def test_overrides_and_dump(tmp_path):
    cfg = RunConfig().with_overrides(["time.dt=5e-4", "domain.dim=2", "domain.cells=[8, 6]",
                                      "domain.lengths=[1.0, 2.0]"])
    assert cfg.get("time.dt") == 5e-4 and cfg.grid() == Grid((8, 6), (1.0, 2.0))
    cfg.dump(tmp_path / "c.yaml")
    again = RunConfig.from_file(tmp_path / "c.yaml")
    assert again.values == cfg.values
    with pytest.raises(ConfigError):
        RunConfig().with_overrides(["time.dt"])
    assert yaml.safe_load((tmp_path / "c.yaml").read_text())["time"]["dt"] == 5e-4


def test_initial_states(tmp_path):
    base = RunConfig({"domain": {"cells": [16]}, "init": {"mu0": 2.0, "rho0": 0.7, "amplitude": 0.2}})
    g = base.grid()
    s = base.with_value("init.type", "constant").initial_state()
    assert np.all(s.mu == 2.0) and np.all(s.rho == 0.7)
    s = base.initial_state()
    assert s.mu[0] == pytest.approx(2.4) and s.mu[-1] == pytest.approx(1.6)
    assert s.rho[0] == pytest.approx(0.7 + 0.2 * 0.3) and np.all((s.rho > 0) & (s.rho < 1))
    r1 = base.with_value("init.type", "random").initial_state()
    r2 = base.with_value("init.type", "random").initial_state()
    assert np.array_equal(r1.rho, r2.rho) and np.all(np.abs(r1.rho - 0.7) <= 0.2)
    write_field(tmp_path / "mu.txt", g, g.full(3.0), 0.0, "mu")
    write_field(tmp_path / "rho.txt", g, g.full(0.4), 0.0, "rho")
    f = base.with_overrides(["init.type=file", f"init.mu_file={tmp_path / 'mu.txt'}",
                             f"init.rho_file={tmp_path / 'rho.txt'}"]).initial_state()
    assert np.all(f.mu == 3.0) and np.all(f.rho == 0.4)
    with pytest.raises(ConfigError):
        base.with_value("init.type", "file").initial_state()
    with pytest.raises(ConfigError):
        base.with_overrides(["domain.cells=[8]", "init.type=file", f"init.mu_file={tmp_path / 'mu.txt'}",
                             f"init.rho_file={tmp_path / 'rho.txt'}"]).initial_state()
