"""Run orchestration shared by the CLI subcommands."""
from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

import numpy as np

from .config import RunConfig
from .errors import SolverError
from .grid import Grid
from .invariants import DIAGNOSTICS_HEADER, DiagnosticsMonitor
from .io import write_csv, write_field
from .stepper import State, Trajectory, simulate

logger = logging.getLogger(__name__)

SWEEP_AXES = ("time.dt", "time.tau", "solver.lambda", "domain.cells")


@dataclass
class RunResult:
    config: RunConfig
    trajectory: Trajectory
    monitor: DiagnosticsMonitor
    error: Optional[SolverError] = None


def run_config(config: RunConfig, init: Optional[State] = None) -> RunResult:
    """Simulate as configured; a solver failure is returned, not raised."""
    grid = config.grid()
    cfg = config.solver_config()
    init = init if init is not None else config.initial_state(grid)
    monitor = DiagnosticsMonitor(grid, cfg)
    try:
        traj = simulate(grid, init, cfg, float(config.get("time.t_end")), sink=monitor,
                        snapshot_every=config.get("output.snapshot_every"),
                        sink_every=config.get("output.diagnostics_every"))
    except SolverError as exc:
        logger.error("solver failure: %s", exc)
        return RunResult(config, exc.trajectory, monitor, exc)
    return RunResult(config, traj, monitor)


def write_run(result: RunResult, out: Path, snapshots: bool = True) -> None:
    out.mkdir(parents=True, exist_ok=True)
    result.config.dump(out / "config.yaml")
    write_csv(out / "diagnostics.csv", DIAGNOSTICS_HEADER, [r.row() for r in result.monitor.records])
    traj = result.trajectory
    if snapshots:
        snap = out / "snapshots"
        snap.mkdir(exist_ok=True)
        for s in traj.states:
            write_field(snap / f"mu_{s.step:08d}.txt", traj.grid, s.mu, s.t, "mu")
            write_field(snap / f"rho_{s.step:08d}.txt", traj.grid, s.rho, s.t, "rho")
    final = traj.final
    write_field(out / "mu_final.txt", traj.grid, final.mu, final.t, "mu")
    write_field(out / "rho_final.txt", traj.grid, final.rho, final.t, "rho")


def laplacian_eigen_error(grid: Grid) -> float:
    """Sup error of the discrete Laplacian on the slowest Neumann eigenfunction."""
    c = np.ones(grid.shape)
    for x, L in zip(grid.coords(), grid.lengths):
        c = c * np.cos(np.pi * x / L)
    lam = sum((np.pi / L) ** 2 for L in grid.lengths)
    return float(np.max(np.abs(grid.laplacian_neumann(c) + lam * c)))


def _sweep_one(payload):
    values, axis, value = payload
    config = RunConfig(values)
    result = run_config(config)
    rec = result.monitor.records[-1]
    return {
        "value": value,
        "status": "ok" if result.error is None else f"failed: {result.error}",
        "record": rec,
        "grid": result.trajectory.grid,
        "mu": result.trajectory.final.mu,
        "rho": result.trajectory.final.rho,
    }


SWEEP_HEADER = ["axis", "value", "status", "t", "min_mu", "max_mu", "min_rho", "max_rho",
                "conservation_drift", "lyapunov_residual", "laplacian_error",
                "diff_to_prev", "diff_ratio", "drift_ratio", "laplacian_error_ratio"]


def sweep(config: RunConfig, axis: str, values: List, workers: Optional[int] = None):
    """One run per value of ``axis``; returns ``(rows, any_failed)``.

    ``diff_to_prev`` is the sup distance between consecutive terminal states
    (empty when the grids differ); the ``*_ratio`` columns divide the previous
    entry by the current one.
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"sweep axis must be one of {SWEEP_AXES}, got {axis!r}")
    configs = [config.with_value(axis, v) for v in values]
    payloads = [(c.values, axis, v) for c, v in zip(configs, values)]
    if workers is None:
        workers = int(os.environ.get("NSCHSIM_THREADS", os.cpu_count() or 1))
    workers = max(1, min(workers, len(payloads)))
    if workers == 1:
        results = [_sweep_one(p) for p in payloads]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_one, payloads))

    def ratio(a, b):
        return a / b if (a is not None and b not in (None, 0.0)) else None

    rows, prev = [], None
    for res in results:
        rec = res["record"]
        lap = laplacian_eigen_error(res["grid"])
        diff = None
        if prev is not None and prev["grid"] == res["grid"]:
            diff = float(max(np.max(np.abs(res["mu"] - prev["mu"])),
                             np.max(np.abs(res["rho"] - prev["rho"]))))
        row = {
            "axis": axis, "value": res["value"], "status": res["status"], "t": rec.t,
            "min_mu": rec.min_mu, "max_mu": rec.max_mu, "min_rho": rec.min_rho, "max_rho": rec.max_rho,
            "conservation_drift": rec.conservation_drift, "lyapunov_residual": rec.lyapunov_residual,
            "laplacian_error": lap, "diff_to_prev": diff,
            "diff_ratio": ratio(rows[-1]["diff_to_prev"], diff) if rows else None,
            "drift_ratio": ratio(rows[-1]["conservation_drift"], rec.conservation_drift) if rows else None,
            "laplacian_error_ratio": ratio(rows[-1]["laplacian_error"], lap) if rows else None,
        }
        rows.append(row)
        prev = res
    failed = any(r["status"] != "ok" for r in rows)
    return rows, failed


def sweep_rows_for_csv(rows) -> list:
    return [["" if r[k] is None else r[k] for k in SWEEP_HEADER] for r in rows]
