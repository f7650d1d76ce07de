"""Delayed splitting time integrator.

One step from ``t`` to ``t + dt``:

1. look up the delayed chemical potential ``g = mu(t + dt - tau)`` (``mu0``
   while ``t + dt <= tau``; the previous level when ``tau == 0``),
2. solve the implicit Allen-Cahn type step for ``rho``::

       delta (rho+ - rho) / dt - lap rho+ + f'(rho+) = g

3. solve the linear step for ``mu`` with the time-derivative coefficient
   frozen at the old ``rho``::

       (eps + 2 rho) (mu+ - mu) / dt + mu+ (rho+ - rho) / dt - lap mu+ = 0

The matrix of step 3 has diagonal ``eps + rho + rho+ > 0`` plus an M-matrix
Laplacian part, so ``mu+ >= 0`` whenever ``mu >= 0``.
"""
from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional

import numpy as np

from ._newton import damped_newton, is_interior
from .errors import (BufferUnderrun, ConfinementLost, DataHypothesisError,
                     LinearSolveFailed, NewtonDiverged, SolverError)
from .grid import Grid
from .potential import PotentialSpec, yosida_f1, yosida_f1_prime, yosida_f1_second

logger = logging.getLogger(__name__)

FALLBACK_LAMBDA = 1e-8


@dataclass(frozen=True)
class SolverConfig:
    eps: float = 1.0
    delta: float = 1.0
    tau: float = 0.0
    dt: float = 1e-3
    lam: float = 0.0
    newton_tol: float = 1e-10
    newton_max_iter: int = 50
    lin_tol: float = 1e-10
    potential: PotentialSpec = field(default_factory=PotentialSpec)

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.tau >= 0:
            raise ValueError(f"tau must be nonnegative, got {self.tau}")
        if not self.lam >= 0:
            raise ValueError(f"lambda must be nonnegative, got {self.lam}")
        if self.tau > 0:
            ratio = self.tau / self.dt
            if abs(ratio - round(ratio)) > 1e-12 * max(1.0, ratio) or round(ratio) < 1:
                raise ValueError(f"tau={self.tau} is not a positive integer multiple of dt={self.dt}")
        if not (self.newton_tol > 0 and self.lin_tol > 0 and self.newton_max_iter >= 1):
            raise ValueError("tolerances must be positive and newton_max_iter >= 1")

    @property
    def lag_steps(self) -> int:
        """Number of steps spanned by the delay (1 when ``tau == 0``)."""
        return max(1, round(self.tau / self.dt))


@dataclass(frozen=True)
class State:
    t: float
    mu: np.ndarray
    rho: np.ndarray
    cum_grad_mu: float = 0.0
    cum_dtrho_sq: float = 0.0
    step: int = 0


class DelayBuffer:
    """Ring of past ``mu`` levels ``t, t - dt, ..., t - tau`` plus ``mu0``."""

    def __init__(self, mu0: np.ndarray, cfg: SolverConfig, t0: float = 0.0, step0: int = 0):
        self.mu0 = mu0
        self.t0 = t0
        self.step0 = step0
        self.dt = cfg.dt
        self.depth = cfg.lag_steps + 1
        self._ring = deque(maxlen=self.depth)
        self._ring.append((t0, mu0))

    def push(self, t: float, mu: np.ndarray) -> None:
        if self._ring and t <= self._ring[-1][0]:
            raise BufferUnderrun(f"history must be time-ordered, got t={t} after {self._ring[-1][0]}")
        self._ring.append((t, mu))

    @property
    def latest(self) -> np.ndarray:
        return self._ring[-1][1]

    @property
    def times(self) -> list:
        return [t for t, _ in self._ring]

    def at(self, t: float) -> np.ndarray:
        for ti, mu in reversed(self._ring):
            if abs(ti - t) <= 1e-6 * self.dt:
                return mu
        raise BufferUnderrun(f"no stored mu at t={t}; history covers {self.times}")

    def __len__(self):
        return len(self._ring)


def delayed_mu(buffer: DelayBuffer, t: float, cfg: SolverConfig) -> np.ndarray:
    """``mu(t - tau)`` for ``t > tau`` and ``mu0`` otherwise.

    With ``tau == 0`` this is the most recent stored level, i.e. the lag is one
    step.
    """
    if cfg.tau == 0:
        return buffer.latest
    if t <= cfg.tau + 1e-9 * cfg.dt:
        return buffer.mu0
    return buffer.at(t - cfg.tau)


def _nonlinearity(cfg: SolverConfig):
    """``(f, f', f'')`` with ``f1`` replaced by its Yosida envelope when ``lam > 0``."""
    pot = cfg.potential
    if cfg.lam > 0:
        lam = cfg.lam
        return (lambda r: yosida_f1(pot, r, lam) + pot.smooth(r),
                lambda r: yosida_f1_prime(pot, r, lam) + pot.smooth_prime(r),
                lambda r: yosida_f1_second(pot, r, lam) + pot.smooth_second(r))
    return pot.value, pot.prime, pot.second


def rho_step(grid: Grid, rho_old: np.ndarray, mu_delayed: np.ndarray, cfg: SolverConfig) -> np.ndarray:
    """Backward-Euler step of the order-parameter equation.

    Raises
    ------
    NewtonDiverged
        iteration cap hit or line search stalled.
    ConfinementLost
        no damped step stays inside (0, 1).
    """
    if not is_interior(rho_old):
        raise ConfinementLost("rho_old is not strictly inside (0, 1)")
    f, fp, fpp = _nonlinearity(cfg)
    a = cfg.delta / cfg.dt
    lap_scale = 4.0 * sum(1.0 / h**2 for h in grid.h)
    g_scale = float(np.max(np.abs(mu_delayed)))

    def residual(r):
        return a * (r - rho_old) - grid.laplacian_neumann(r) + fp(r) - mu_delayed

    def energy(r):
        # the residual is the quadrature-weighted gradient of this functional
        return (grid.integrate(0.5 * a * (r - rho_old) ** 2 + f(r) - mu_delayed * r)
                + 0.5 * grid.grad_sq_integral(r))

    def scale(r):
        # one ulp of rho moves f'(rho) by about |f''(rho)| eps |rho|
        return (a + lap_scale + float(np.max(np.abs(fp(r)))) + g_scale
                + float(np.max(np.abs(fpp(r) * r))))

    rho, _, _ = damped_newton(grid, rho_old, residual, lambda r: a + fpp(r),
                              cfg.newton_tol, cfg.newton_max_iter, scale, energy)
    return rho


def mu_step(grid: Grid, mu_old: np.ndarray, rho_old: np.ndarray, rho_new: np.ndarray,
            cfg: SolverConfig) -> np.ndarray:
    diag = cfg.eps + rho_old + rho_new
    rhs = (cfg.eps + 2.0 * rho_old) * mu_old
    mu = grid.solve_shifted(diag, cfg.dt, rhs)
    res = diag * mu - cfg.dt * grid.laplacian_neumann(mu) - rhs
    res_sup = float(np.max(np.abs(res))) if np.all(np.isfinite(mu)) else np.inf
    if res_sup > cfg.lin_tol * max(1.0, float(np.max(np.abs(rhs)))):
        raise LinearSolveFailed(f"mu step residual {res_sup:.3e} exceeds lin_tol={cfg.lin_tol}")
    return mu


def advance(grid: Grid, state: State, buffer: DelayBuffer, cfg: SolverConfig):
    """One delayed-splitting step; returns ``(new_state, buffer)``.

    If the exact singular solve fails, the rho step is retried once with the
    Yosida regularization at ``lambda = 1e-8``.
    """
    dt = cfg.dt
    # time from the step count, so long runs land exactly on t0 + n dt
    t_new = buffer.t0 + (state.step + 1 - buffer.step0) * dt
    g = delayed_mu(buffer, t_new, cfg)
    try:
        rho_new = rho_step(grid, state.rho, g, cfg)
    except (NewtonDiverged, ConfinementLost) as exc:
        if cfg.lam > 0:
            raise
        logger.warning("rho step failed at t=%.6g (%s); retrying with lambda=%g", t_new, exc, FALLBACK_LAMBDA)
        rho_new = rho_step(grid, state.rho, g, replace(cfg, lam=FALLBACK_LAMBDA))
    mu_new = mu_step(grid, state.mu, state.rho, rho_new, cfg)
    drho = rho_new - state.rho
    new = State(
        t=t_new,
        mu=mu_new,
        rho=rho_new,
        cum_grad_mu=state.cum_grad_mu + dt * grid.grad_sq_integral(mu_new),
        cum_dtrho_sq=state.cum_dtrho_sq + cfg.delta * grid.integrate(drho * drho) / dt,
        step=state.step + 1,
    )
    buffer.push(t_new, mu_new)
    return new, buffer


@dataclass
class Trajectory:
    grid: Grid
    cfg: SolverConfig
    states: List[State]

    @property
    def initial(self) -> State:
        return self.states[0]

    @property
    def final(self) -> State:
        return self.states[-1]

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])

    def __len__(self):
        return len(self.states)

    def tail(self, window: float) -> "Trajectory":
        """States with ``t >= t_final - window`` plus the one just before."""
        t_end = self.final.t
        if window > t_end - self.initial.t + 1e-12:
            raise ValueError(f"window {window} is longer than the trajectory ({t_end - self.initial.t})")
        idx = next(i for i, s in enumerate(self.states) if s.t >= t_end - window - 1e-12)
        return Trajectory(self.grid, self.cfg, self.states[max(0, idx - 1):])


def validate_initial_data(grid: Grid, mu0: np.ndarray, rho0: np.ndarray) -> None:
    """Enforce ``mu0 >= 0`` and ``0 < rho0 < 1`` nodal-wise."""
    mu0 = grid.check_field(mu0, "mu0")
    rho0 = grid.check_field(rho0, "rho0")
    if np.min(mu0) < 0:
        raise DataHypothesisError(
            f"initial data violate mu0 >= 0: min mu0 = {np.min(mu0):.6g}")
    if not (np.min(rho0) > 0 and np.max(rho0) < 1):
        raise DataHypothesisError(
            f"initial data violate 0 < rho0 < 1: range [{np.min(rho0):.6g}, {np.max(rho0):.6g}]")


Sink = Callable[[State, Optional[State]], None]


def simulate(grid: Grid, init: State, cfg: SolverConfig, t_end: float,
             sink: Optional[Sink] = None, snapshot_every: int = 100,
             sink_every: int = 1) -> Trajectory:
    """Advance ``init`` until ``t >= t_end``.

    ``sink(state, previous_state)`` is called on the initial state (with
    ``previous_state=None``), every ``sink_every`` steps and on the last step.
    Snapshots are stored every ``snapshot_every`` steps plus the first and
    last state.

    On a solver failure the exception gets a ``trajectory`` attribute holding
    every snapshot up to the last accepted state, and is re-raised.
    """
    validate_initial_data(grid, init.mu, init.rho)
    n_steps = max(0, math.ceil((t_end - init.t) / cfg.dt - 1e-9))
    buffer = DelayBuffer(init.mu, cfg, init.t, init.step)
    state = init
    states = [init]
    if sink is not None:
        sink(init, None)
    for k in range(1, n_steps + 1):
        prev = state
        try:
            state, buffer = advance(grid, state, buffer, cfg)
        except SolverError as exc:
            if states[-1] is not prev:
                states.append(prev)
            exc.trajectory = Trajectory(grid, cfg, states)
            raise
        if k % snapshot_every == 0 or k == n_steps:
            states.append(state)
        if sink is not None and (k % sink_every == 0 or k == n_steps):
            sink(state, prev)
    return Trajectory(grid, cfg, states)
