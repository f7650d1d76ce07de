"""Command-line entry point.

Exit codes: 0 success, 1 invalid configuration or initial data, 2 solver
failure, 3 verification failure. Logs go to standard error; data go to files
under ``output.dir`` and short summaries to standard output.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig
from .errors import BufferUnderrun, SolverError
from .invariants import DEGIORGI_HEADER, degiorgi_diagnostic
from .io import read_field, write_csv, write_field
from .oracle import homogeneous_oracle
from .runner import SWEEP_AXES, SWEEP_HEADER, run_config, sweep, sweep_rows_for_csv, write_run
from .steady import omega_limit_probe, solve_steady
from .stepper import State

logger = logging.getLogger("nschsim")

EXIT_OK, EXIT_INVALID, EXIT_SOLVER, EXIT_VERIFY = 0, 1, 2, 3


class VerificationFailed(Exception):
    pass


def _load_config(args) -> RunConfig:
    config = RunConfig.from_file(args.config) if args.config else RunConfig()
    config = config.with_overrides(args.set or [])
    if args.out:
        config = config.with_value("output.dir", str(args.out))
    return config


def _plots(args):
    if args.no_plots:
        return None
    from . import plotting
    return plotting


def _write_degiorgi(report, out: Path, plotting) -> None:
    write_csv(out / "degiorgi.csv", DEGIORGI_HEADER, report.rows())
    if plotting:
        plotting.plot_degiorgi(report, out / "degiorgi.png")


def _finish_run(result, out: Path, plotting, snapshots: bool = True) -> None:
    write_run(result, out, snapshots=snapshots)
    if plotting:
        plotting.plot_diagnostics(result.monitor.records, out / "diagnostics.png")
        plotting.plot_fields(result.trajectory, out / "fields.png")
    if result.error is not None:
        raise result.error


def cmd_simulate(args) -> int:
    config = _load_config(args)
    out = Path(config.get("output.dir"))
    plotting = _plots(args)
    result = run_config(config)
    _finish_run(result, out, plotting)
    final = result.trajectory.final
    print(f"t={final.t:.6g} min_mu={np.min(final.mu):.6g} max_mu={np.max(final.mu):.6g} "
          f"min_rho={np.min(final.rho):.6g} max_rho={np.max(final.rho):.6g}")
    if args.probe_window is not None:
        report = omega_limit_probe(result.trajectory, args.probe_window)
        write_csv(out / "omega_probe.csv", ["quantity", "value"], report.rows())
        print(f"omega probe: converged={report.converged} steady_residual={report.steady_residual:.3e}")
    return EXIT_OK


def cmd_steady(args) -> int:
    config = _load_config(args)
    grid = config.grid()
    spec = config.potential()
    if args.init == "const":
        rho_init = grid.full(float(config.get("init.rho0")))
    else:
        path = config.get("init.rho_file")
        if not path:
            raise ValueError("--init file needs init.rho_file")
        fgrid, rho_init, _, _ = read_field(path)
        if fgrid != grid:
            raise ValueError(f"{path} does not match the configured grid")
    st = solve_steady(grid, args.mu_s, rho_init, spec, tol=args.tol, max_iter=args.max_iter)
    out = Path(config.get("output.dir"))
    out.mkdir(parents=True, exist_ok=True)
    config.dump(out / "config.yaml")
    write_field(out / "rho_s.txt", grid, st.rho_s, 0.0, "rho")
    print(f"mu_s={st.mu_s:.17g} residual={st.residual_norm:.3e} "
          f"min_rho={np.min(st.rho_s):.17g} max_rho={np.max(st.rho_s):.17g}")
    return EXIT_OK


def _check(label: str, ok: bool, detail: str, failures: list) -> None:
    print(f"{'PASS' if ok else 'FAIL'} {label}: {detail}")
    if not ok:
        failures.append(label)


def cmd_verify(args) -> int:
    config = _load_config(args)
    out = Path(config.get("output.dir"))
    plotting = _plots(args)
    grid = config.grid()
    failures: list = []

    if args.case == "stationary":
        mu_s = float(config.get("init.mu0"))
        st = solve_steady(grid, mu_s, grid.full(float(config.get("init.rho0"))),
                          config.potential(), tol=1e-12)
        init = State(0.0, grid.full(mu_s), st.rho_s)
    elif args.case == "homogeneous":
        init = State(0.0, grid.full(float(config.get("init.mu0"))), grid.full(float(config.get("init.rho0"))))
    else:
        init = config.initial_state(grid)

    result = run_config(config, init)
    _finish_run(result, out, plotting, snapshots=False)
    traj, records = result.trajectory, result.monitor.records
    mon = result.monitor

    min_mu = float(np.min(mon.column("min_mu")))
    _check("positivity", min_mu >= -1e-9, f"min mu = {min_mu:.3e}", failures)
    lo, hi = float(np.min(mon.column("min_rho"))), float(np.max(mon.column("max_rho")))
    _check("confinement", lo > 1e-12 and hi < 1 - 1e-12, f"rho in [{lo:.6g}, {hi:.6g}]", failures)
    drift = float(np.max(mon.column("conservation_drift")))
    _check("first estimate", drift <= args.drift_tol, f"max drift = {drift:.3e}", failures)
    lyap = float(np.max(mon.column("lyapunov_residual")))
    _check("energy identity", lyap <= args.lyapunov_tol, f"max residual = {lyap:.3e}", failures)

    if np.max(traj.initial.mu) > 0:
        report = degiorgi_diagnostic(traj, args.m, args.j_max)
        _write_degiorgi(report, out, plotting)
        _check("level sets", report.bounded and report.first_zero_level is not None,
               f"sup mu = {report.sup_mu_observed:.6g}, 2M = {2 * report.M:.6g}, "
               f"S_j = 0 from j = {report.first_zero_level}", failures)
    else:
        write_csv(out / "degiorgi.csv", DEGIORGI_HEADER, [])

    if args.case == "stationary":
        change = max(float(np.max(np.abs(s.mu - init.mu))) + float(np.max(np.abs(s.rho - init.rho)))
                     for s in traj.states)
        _check("stationarity", change <= 1e-8, f"max change = {change:.3e}", failures)
        probes = max(max(r.dtrho_l2, r.grad_mu_l2, r.mu_oscillation) for r in records)
        _check("decay probes", probes <= 1e-8, f"max probe = {probes:.3e}", failures)

    if args.case == "homogeneous":
        cfg = traj.cfg
        rho0, mu0 = float(init.rho[(0,) * grid.dim]), float(init.mu[(0,) * grid.dim])
        oracle = homogeneous_oracle(rho0, mu0, cfg, traj.final.t)
        t = np.array([r.t for r in records])
        o_mu, o_rho = oracle.at(t)
        inv = (0.5 * cfg.eps + o_rho) * o_mu**2
        write_csv(out / "oracle.csv", ["t", "mu", "rho", "invariant"], zip(t, o_mu, o_rho, inv))
        err_mu = max(abs(r.max_mu - m) for r, m in zip(records, o_mu))
        err_mu = max(err_mu, max(abs(r.min_mu - m) for r, m in zip(records, o_mu)))
        err_rho = max(max(abs(r.max_rho - v), abs(r.min_rho - v)) for r, v in zip(records, o_rho))
        print(f"max |mu - oracle| = {err_mu:.3e}  max |rho - oracle| = {err_rho:.3e}")
        _check("oracle mu", err_mu <= args.oracle_tol, f"{err_mu:.3e}", failures)
        _check("oracle rho", err_rho <= args.oracle_tol, f"{err_rho:.3e}", failures)
        spread = float(np.ptp(inv))
        _check("oracle invariant", spread <= 1e-8, f"spread = {spread:.3e}", failures)
        if plotting:
            plotting.plot_oracle(t, [r.max_mu for r in records], [r.max_rho for r in records],
                                 o_mu, o_rho, out / "oracle.png")

    if failures:
        raise VerificationFailed(", ".join(failures))
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = _load_config(args)
    out = Path(config.get("output.dir"))
    out.mkdir(parents=True, exist_ok=True)
    values = [_parse_value(v) for v in args.values.split(",") if v.strip()]
    if args.axis == "domain.cells":
        values = [[int(v)] * config.get("domain.dim") for v in values]
    rows, failed = sweep(config, args.axis, values)
    config.dump(out / "config.yaml")
    write_csv(out / "sweep.csv", SWEEP_HEADER, sweep_rows_for_csv(rows))
    for r in rows:
        print(f"{args.axis}={r['value']} status={r['status']} drift={r['conservation_drift']:.3e} "
              f"diff_to_prev={r['diff_to_prev']} lap_err={r['laplacian_error']:.3e}")
    plotting = _plots(args)
    if plotting:
        xs = [v[0] if isinstance(v, list) else v for v in values]
        plotting.plot_sweep(args.axis, xs, {
            "conservation drift": [r["conservation_drift"] for r in rows],
            "laplacian error": [r["laplacian_error"] for r in rows],
            "diff to prev": [np.nan if r["diff_to_prev"] is None else r["diff_to_prev"] for r in rows],
        }, out / "sweep.png")
    return EXIT_SOLVER if failed else EXIT_OK


def cmd_degiorgi(args) -> int:
    config = _load_config(args)
    out = Path(config.get("output.dir"))
    plotting = _plots(args)
    result = run_config(config)
    _finish_run(result, out, plotting, snapshots=False)
    report = degiorgi_diagnostic(result.trajectory, args.m, args.j_max)
    _write_degiorgi(report, out, plotting)
    print(f"M={report.M:.6g} sup_mu={report.sup_mu_observed:.6g} bound_2M={2 * report.M:.6g} "
          f"first_zero_level={report.first_zero_level} bounded={report.bounded}")
    return EXIT_OK


def _parse_value(text: str):
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        return float(text)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", help="YAML run configuration")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config key, e.g. --set time.dt=5e-4 (repeatable)")
    common.add_argument("-o", "--out", help="output directory (overrides output.dir)")
    common.add_argument("--no-plots", action="store_true", help="skip PNG figures")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="nschsim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="run a simulation")
    p.add_argument("--probe-window", type=float, default=None, metavar="W",
                   help="append an omega-limit probe over the last W time units")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("steady", parents=[common], help="solve the steady-state problem")
    p.add_argument("--mu-s", type=float, required=True)
    p.add_argument("--init", choices=("const", "file"), default="const")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=50)
    p.set_defaults(func=cmd_steady)

    p = sub.add_parser("verify", parents=[common], help="run and check identities and bounds")
    p.add_argument("--case", choices=("config", "stationary", "homogeneous"), default="config")
    p.add_argument("--drift-tol", type=float, default=1e-2)
    p.add_argument("--lyapunov-tol", type=float, default=1e-2)
    p.add_argument("--oracle-tol", type=float, default=1e-3)
    p.add_argument("--m", type=float, default=2.0)
    p.add_argument("--j-max", type=int, default=60)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", parents=[common], help="parameter sweep with convergence ratios")
    p.add_argument("--axis", choices=SWEEP_AXES, required=True)
    p.add_argument("--values", required=True, help="comma-separated values")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("degiorgi", parents=[common], help="level-set diagnostic for mu")
    p.add_argument("--m", type=float, default=2.0)
    p.add_argument("--j-max", type=int, default=60)
    p.set_defaults(func=cmd_degiorgi)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except VerificationFailed as exc:
        logger.error("verification failed: %s", exc)
        return EXIT_VERIFY
    except (SolverError, BufferUnderrun) as exc:
        logger.error("solver failure: %s", exc)
        return EXIT_SOLVER
    except ValueError as exc:
        logger.error("invalid input: %s", exc)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())
