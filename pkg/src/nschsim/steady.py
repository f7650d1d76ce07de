"""Steady states and long-time convergence probes.

A steady state is a constant ``mu_s >= 0`` together with ``rho_s`` solving
``-lap rho_s + f'(rho_s) = mu_s`` under zero-flux conditions. Because ``f`` is
not convex the problem can have several solutions; ``solve_steady`` returns
the one Newton reaches from the supplied initial guess.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._newton import damped_newton, is_interior
from .errors import ConfinementLost
from .grid import Grid
from .potential import PotentialSpec
from .stepper import Trajectory


@dataclass(frozen=True)
class SteadyState:
    mu_s: float
    rho_s: np.ndarray
    residual_norm: float
    iterations: int = 0


def steady_residual(grid: Grid, rho: np.ndarray, mu_s: float, spec: PotentialSpec) -> np.ndarray:
    return -grid.laplacian_neumann(rho) + spec.prime(rho) - mu_s


def solve_steady(grid: Grid, mu_s: float, rho_init: np.ndarray, spec: PotentialSpec,
                 tol: float = 1e-10, max_iter: int = 50) -> SteadyState:
    if not mu_s >= 0:
        raise ValueError(f"mu_s must be nonnegative, got {mu_s}")
    rho_init = grid.check_field(rho_init, "rho_init")
    if not is_interior(rho_init):
        raise ConfinementLost("rho_init is not strictly inside (0, 1)")
    lap_scale = 4.0 * sum(1.0 / h**2 for h in grid.h)
    rho, iters, res = damped_newton(
        grid, rho_init,
        lambda r: steady_residual(grid, r, mu_s, spec),
        spec.second,
        tol, max_iter,
        scale=lambda r: (lap_scale + float(np.max(np.abs(spec.prime(r)))) + mu_s
                         + float(np.max(np.abs(spec.second(r) * r)))),
        energy=lambda r: grid.integrate(spec.value(r) - mu_s * r) + 0.5 * grid.grad_sq_integral(r),
    )
    return SteadyState(float(mu_s), rho, res, iters)


@dataclass(frozen=True)
class OmegaThresholds:
    dtrho: float = 1e-6
    grad_mu: float = 1e-6
    oscillation: float = 1e-6
    steady: float = 1e-6


@dataclass(frozen=True)
class OmegaProbeReport:
    window_start: float
    window_end: float
    dtrho_l2: float
    grad_mu_l2: float
    mu_oscillation: float
    terminal_grad_mu_l2: float
    terminal_mu_oscillation: float
    mu_s: float
    steady_residual: float
    converged: bool

    def rows(self) -> list:
        return [[name, getattr(self, name)] for name in (
            "window_start", "window_end", "dtrho_l2", "grad_mu_l2", "mu_oscillation",
            "terminal_grad_mu_l2", "terminal_mu_oscillation", "mu_s",
            "steady_residual", "converged")]


def omega_limit_probe(traj: Trajectory, window: float,
                      thresholds: OmegaThresholds = OmegaThresholds()) -> OmegaProbeReport:
    """Check that the tail ``[t_end - window, t_end]`` sits at a steady state.

    Reports window suprema of ``|d rho/dt|_L2`` (difference quotients between
    stored snapshots), ``|grad mu|_L2`` and ``max mu - min mu``, and the L2
    steady residual of the last ``rho`` against ``mu_s = mean(mu_final)``.
    """
    grid, spec = traj.grid, traj.cfg.potential
    tail = traj.tail(window)
    states = tail.states
    t0 = traj.final.t - window
    in_window = [s for s in states if s.t >= t0 - 1e-12]
    dtrho = 0.0
    for a, b in zip(states[:-1], states[1:]):
        if b.t >= t0 - 1e-12 and b.t > a.t:
            dtrho = max(dtrho, grid.l2_norm((b.rho - a.rho) / (b.t - a.t)))
    grad = [float(np.sqrt(grid.grad_sq_integral(s.mu))) for s in in_window]
    osc = [float(np.ptp(s.mu)) for s in in_window]
    final = traj.final
    mu_s = grid.mean(final.mu)
    res = grid.l2_norm(steady_residual(grid, final.rho, mu_s, spec))
    converged = (dtrho <= thresholds.dtrho and max(grad) <= thresholds.grad_mu
                 and max(osc) <= thresholds.oscillation and res <= thresholds.steady)
    return OmegaProbeReport(
        window_start=t0, window_end=final.t,
        dtrho_l2=dtrho, grad_mu_l2=max(grad), mu_oscillation=max(osc),
        terminal_grad_mu_l2=grad[-1], terminal_mu_oscillation=osc[-1],
        mu_s=mu_s, steady_residual=res, converged=bool(converged),
    )
