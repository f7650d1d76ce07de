"""Run configuration: nested YAML mapping with fixed keys and defaults.

Sections and keys::

    domain:  dim, cells, lengths
    model:   theta, theta_c, potential, eps, delta
    time:    dt, tau, t_end
    solver:  lambda, newton_tol, newton_max_iter, lin_tol
    init:    type, mu0, rho0, amplitude, seed, mu_file, rho_file
    output:  dir, snapshot_every, diagnostics_every

Unknown sections or keys are rejected.
"""
from __future__ import annotations

import copy
from pathlib import Path
from typing import Any, Iterable

import numpy as np
import yaml

from .errors import ConfigError
from .grid import Grid
from .potential import PotentialSpec
from .stepper import SolverConfig, State

DEFAULTS = {
    "domain": {"dim": 1, "cells": [128], "lengths": [1.0]},
    "model": {"theta": 1.0, "theta_c": 3.0, "potential": "log", "eps": 1.0, "delta": 1.0},
    "time": {"dt": 1e-3, "tau": 0.0, "t_end": 1.0},
    "solver": {"lambda": 0.0, "newton_tol": 1e-10, "newton_max_iter": 50, "lin_tol": 1e-10},
    "init": {"type": "cosine", "mu0": 1.0, "rho0": 0.5, "amplitude": 0.1, "seed": 0,
             "mu_file": None, "rho_file": None},
    "output": {"dir": "out", "snapshot_every": 100, "diagnostics_every": 1},
}
INIT_TYPES = ("constant", "cosine", "random", "file")


def _merge(base: dict, update: dict, where: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in (update or {}).items():
        path = f"{where}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key '{path}'")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"'{path}' must be a mapping")
            out[key] = _merge(base[key], value, path + ".")
        else:
            out[key] = value
    return out


def _as_number(value, kind, key):
    # YAML 1.1 reads "1e-3" as a string
    try:
        if kind is int:
            f = float(value)
            if f != int(f):
                raise ValueError
            return int(f)
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"'{key}' must be {'an integer' if kind is int else 'a number'}, got {value!r}")


def _coerce(values: dict) -> dict:
    for section, keys in DEFAULTS.items():
        for key, default in keys.items():
            name = f"{section}.{key}"
            value = values[section][key]
            if isinstance(default, bool) or default is None or isinstance(default, str):
                continue
            if isinstance(default, list):
                kind = type(default[0])
                items = value if isinstance(value, list) else [value]
                values[section][key] = [_as_number(v, kind, name) for v in items]
            else:
                values[section][key] = _as_number(value, type(default), name)
    return values


class RunConfig:
    """Validated effective configuration (defaults merged with user values)."""

    def __init__(self, values: dict | None = None):
        self.values = _coerce(_merge(DEFAULTS, values or {}))
        self.validate()

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        try:
            data = yaml.safe_load(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc
        if data is not None and not isinstance(data, dict):
            raise ConfigError(f"{path} must contain a mapping")
        return cls(data or {})

    def get(self, key: str) -> Any:
        node = self.values
        for part in key.split("."):
            if not isinstance(node, dict) or part not in node:
                raise ConfigError(f"unknown config key '{key}'")
            node = node[part]
        return node

    def with_value(self, key: str, value: Any) -> "RunConfig":
        parts = key.split(".")
        update: dict = {}
        node = update
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value
        merged = _merge(self.values, update)
        return RunConfig(merged)

    def with_overrides(self, items: Iterable[str]) -> "RunConfig":
        """Apply ``key=value`` strings; values are parsed as YAML scalars/lists."""
        cfg = self
        for item in items:
            if "=" not in item:
                raise ConfigError(f"override '{item}' is not of the form key=value")
            key, raw = item.split("=", 1)
            cfg = cfg.with_value(key.strip(), yaml.safe_load(raw))
        return cfg

    def dump(self, path) -> None:
        Path(path).write_text(yaml.safe_dump(self.values, sort_keys=False))

    # builders
    def grid(self) -> Grid:
        dim = self.get("domain.dim")
        if dim not in (1, 2):
            raise ConfigError(f"domain.dim must be 1 or 2, got {dim}")
        cells = np.atleast_1d(self.get("domain.cells"))
        lengths = np.atleast_1d(self.get("domain.lengths"))
        if cells.size == 1:
            cells = np.repeat(cells, dim)
        if lengths.size == 1:
            lengths = np.repeat(lengths, dim)
        if cells.size != dim or lengths.size != dim:
            raise ConfigError("domain.cells and domain.lengths need one entry per axis")
        if not np.all(cells == np.round(cells)):
            raise ConfigError(f"domain.cells must be integers, got {cells.tolist()}")
        try:
            return Grid(tuple(int(c) for c in cells), tuple(float(L) for L in lengths))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def potential(self) -> PotentialSpec:
        if self.get("model.potential") != "log":
            raise ConfigError(f"model.potential must be 'log', got {self.get('model.potential')!r}")
        try:
            return PotentialSpec(float(self.get("model.theta")), float(self.get("model.theta_c")))
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def solver_config(self) -> SolverConfig:
        try:
            return SolverConfig(
                eps=float(self.get("model.eps")),
                delta=float(self.get("model.delta")),
                tau=float(self.get("time.tau")),
                dt=float(self.get("time.dt")),
                lam=float(self.get("solver.lambda")),
                newton_tol=float(self.get("solver.newton_tol")),
                newton_max_iter=int(self.get("solver.newton_max_iter")),
                lin_tol=float(self.get("solver.lin_tol")),
                potential=self.potential(),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def initial_state(self, grid: Grid | None = None) -> State:
        """Initial fields per ``init.type`` (data hypotheses are checked by ``simulate``)."""
        from .io import read_field

        grid = grid or self.grid()
        kind = self.get("init.type")
        mu0 = float(self.get("init.mu0"))
        rho0 = float(self.get("init.rho0"))
        amp = float(self.get("init.amplitude"))
        if kind == "constant":
            return State(0.0, grid.full(mu0), grid.full(rho0))
        if kind == "cosine":
            c = np.ones(grid.shape)
            for x, L in zip(grid.coords(), grid.lengths):
                c = c * np.cos(np.pi * x / L)
            return State(0.0, mu0 * (1.0 + amp * c), rho0 + amp * min(rho0, 1.0 - rho0) * c)
        if kind == "random":
            rng = np.random.default_rng(int(self.get("init.seed")))
            return State(0.0, grid.full(mu0), rho0 + amp * rng.uniform(-1.0, 1.0, grid.shape))
        fields = {}
        for name in ("mu", "rho"):
            path = self.get(f"init.{name}_file")
            if not path:
                raise ConfigError(f"init.type=file needs init.{name}_file")
            fgrid, values, _, _ = read_field(path)
            if fgrid != grid:
                raise ConfigError(f"{path} is on grid {fgrid}, config expects {grid}")
            fields[name] = values
        return State(0.0, fields["mu"], fields["rho"])

    def validate(self) -> None:
        self.grid()
        self.solver_config()
        if self.get("init.type") not in INIT_TYPES:
            raise ConfigError(f"init.type must be one of {INIT_TYPES}, got {self.get('init.type')!r}")
        t_end = self.get("time.t_end")
        if not t_end >= 0:
            raise ConfigError(f"time.t_end must be a nonnegative number, got {t_end!r}")
        for key in ("output.snapshot_every", "output.diagnostics_every"):
            v = self.get(key)
            if v < 1:
                raise ConfigError(f"{key} must be a positive integer, got {v!r}")
