"""Identities and a priori quantities evaluated on discrete trajectories.

Time integrals over stored snapshots use the right-rectangle rule: snapshot
``i`` carries weight ``t_i - t_{i-1}`` and the initial snapshot none.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import DegenerateError
from .grid import Grid
from .potential import PotentialSpec, convex_prime_inverse
from .stepper import SolverConfig, State, Trajectory

DIAGNOSTICS_HEADER = [
    "step", "t", "min_mu", "max_mu", "min_rho", "max_rho", "weighted_mu_energy",
    "cum_grad_mu", "conservation_drift", "lyapunov_residual", "dtrho_l2",
    "grad_mu_l2", "mu_oscillation",
]
DEGIORGI_HEADER = ["j", "k_j", "S_j", "triple_norm_j"]


def weighted_mu_energy(grid: Grid, state: State, cfg: SolverConfig) -> float:
    """``integral of (eps/2 + rho) mu^2``."""
    return grid.integrate((0.5 * cfg.eps + state.rho) * state.mu**2)


def first_estimate_lhs(grid: Grid, state: State, cfg: SolverConfig) -> float:
    return weighted_mu_energy(grid, state, cfg) + state.cum_grad_mu


def first_estimate_drift(traj: Trajectory, relative: bool = True) -> float:
    """Largest deviation of ``energy + cumulative |grad mu|^2`` from its start.

    With ``relative=True`` the deviation is divided by the initial value;
    that raises ``DegenerateError`` when the initial value is zero (``mu0 == 0``),
    in which case ask for the absolute drift.
    """
    grid, cfg = traj.grid, traj.cfg
    lhs = np.array([first_estimate_lhs(grid, s, cfg) for s in traj.states])
    drift = float(np.max(np.abs(lhs - lhs[0])))
    if not relative:
        return drift
    if lhs[0] == 0:
        raise DegenerateError("initial weighted energy vanishes; use relative=False")
    return drift / lhs[0]


def lyapunov_sides(grid: Grid, state: State, init: State, cfg: SolverConfig):
    """Both sides of the integrated energy identity for the order parameter.

    ``delta int|dt rho|^2 + |grad rho|^2/2 + int f(rho)`` on the left, initial
    energy plus ``eps int mu + 2 int rho mu`` increments on the right.
    """
    pot = cfg.potential
    lhs = (state.cum_dtrho_sq + 0.5 * grid.grad_sq_integral(state.rho)
           + grid.integrate(pot.value(state.rho)))
    rhs = (0.5 * grid.grad_sq_integral(init.rho) + grid.integrate(pot.value(init.rho))
           + cfg.eps * (grid.integrate(state.mu) - grid.integrate(init.mu))
           + 2.0 * (grid.integrate(state.rho * state.mu) - grid.integrate(init.rho * init.mu)))
    return lhs, rhs


def lyapunov_identity_residual(traj: Trajectory, t_index: int = -1) -> float:
    """``|LHS - RHS| / (1 + |RHS|)`` at snapshot ``t_index``."""
    lhs, rhs = lyapunov_sides(traj.grid, traj.states[t_index], traj.initial, traj.cfg)
    return abs(lhs - rhs) / (1.0 + abs(rhs))


def pointwise_identity_residual(grid: Grid, prev: State, nxt: State, cfg: SolverConfig) -> float:
    """L2 norm of the defect in the pointwise energy identity between two levels.

    Both sides use difference quotients in time and Laplacians at the new level.
    """
    dt = nxt.t - prev.t
    drho = (nxt.rho - prev.rho) / dt
    lhs = (cfg.delta * drho**2 - drho * grid.laplacian_neumann(nxt.rho)
           + cfg.potential.prime(nxt.rho) * drho)
    rhs = (cfg.eps * (nxt.mu - prev.mu) / dt
           + 2.0 * (nxt.rho * nxt.mu - prev.rho * prev.mu) / dt
           - grid.laplacian_neumann(nxt.mu))
    return grid.l2_norm(lhs - rhs)


@dataclass(frozen=True)
class DiagnosticsRecord:
    step: int
    t: float
    min_mu: float
    max_mu: float
    min_rho: float
    max_rho: float
    weighted_mu_energy: float
    cum_grad_mu: float
    conservation_drift: float
    lyapunov_lhs: float
    lyapunov_rhs: float
    lyapunov_residual: float
    dtrho_l2: float
    grad_mu_l2: float
    mu_oscillation: float

    def row(self) -> list:
        return [getattr(self, name) for name in DIAGNOSTICS_HEADER]


def diagnostics_record(grid: Grid, state: State, prev: Optional[State], init: State,
                       cfg: SolverConfig) -> DiagnosticsRecord:
    """Diagnostics of ``state``; ``conservation_drift`` is absolute if ``mu0 == 0``."""
    energy = weighted_mu_energy(grid, state, cfg)
    lhs0 = first_estimate_lhs(grid, init, cfg)
    drift = abs(energy + state.cum_grad_mu - lhs0)
    if lhs0 > 0:
        drift /= lhs0
    ly_lhs, ly_rhs = lyapunov_sides(grid, state, init, cfg)
    if prev is None or state.t == prev.t:
        dtrho = 0.0
    else:
        dtrho = grid.l2_norm((state.rho - prev.rho) / (state.t - prev.t))
    return DiagnosticsRecord(
        step=state.step,
        t=state.t,
        min_mu=float(np.min(state.mu)),
        max_mu=float(np.max(state.mu)),
        min_rho=float(np.min(state.rho)),
        max_rho=float(np.max(state.rho)),
        weighted_mu_energy=energy,
        cum_grad_mu=state.cum_grad_mu,
        conservation_drift=drift,
        lyapunov_lhs=ly_lhs,
        lyapunov_rhs=ly_rhs,
        lyapunov_residual=abs(ly_lhs - ly_rhs) / (1.0 + abs(ly_rhs)),
        dtrho_l2=dtrho,
        grad_mu_l2=float(np.sqrt(grid.grad_sq_integral(state.mu))),
        mu_oscillation=float(np.max(state.mu) - np.min(state.mu)),
    )


class DiagnosticsMonitor:
    """Sink for ``simulate`` collecting one ``DiagnosticsRecord`` per call."""

    def __init__(self, grid: Grid, cfg: SolverConfig):
        self.grid = grid
        self.cfg = cfg
        self.init: Optional[State] = None
        self.records: List[DiagnosticsRecord] = []

    def __call__(self, state: State, prev: Optional[State]) -> None:
        if self.init is None:
            self.init = state
        self.records.append(diagnostics_record(self.grid, state, prev, self.init, self.cfg))

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])


# -- level-set (De Giorgi) diagnostics ---------------------------------------

def _time_weights(traj: Trajectory) -> np.ndarray:
    t = traj.times
    return np.concatenate([[0.0], np.diff(t)])


def mixed_norm(traj: Trajectory, fields: List[np.ndarray], p_time: float, q_space: float) -> float:
    """``L^p(0, T; L^q)`` norm of a snapshot sequence."""
    grid = traj.grid
    w = _time_weights(traj)
    inner = np.array([grid.lq_norm(v, q_space) for v in fields])
    return float(np.sum(w * inner**p_time) ** (1.0 / p_time))


def triple_norm(traj: Trajectory, fields: List[np.ndarray]) -> float:
    """``sqrt(sup_t |v(t)|^2_L2 + int_0^T |grad v|^2)``."""
    grid = traj.grid
    w = _time_weights(traj)
    sup_l2 = max(grid.integrate(v * v) for v in fields)
    grad = sum(wi * grid.grad_sq_integral(v) for wi, v in zip(w, fields))
    return float(np.sqrt(sup_l2 + grad))


@dataclass
class DeGiorgiReport:
    M: float
    m: float
    mu0_sup: float
    k_levels: np.ndarray
    S_levels: np.ndarray
    S_levels_l2l4: np.ndarray
    triple_norms: np.ndarray
    sup_mu_observed: float
    first_zero_level: Optional[int] = None
    bounded: bool = field(default=False)

    def rows(self) -> list:
        return [[j, k, s, n] for j, (k, s, n) in
                enumerate(zip(self.k_levels, self.S_levels, self.triple_norms))]


def degiorgi_levels(M: float, j_max: int) -> np.ndarray:
    j = np.arange(j_max + 1)
    return M * (2.0 - 2.0 ** (-j))


def degiorgi_diagnostic(traj: Trajectory, m: float = 2.0, j_max: int = 60) -> DeGiorgiReport:
    """Level-set norms of ``mu`` above ``k_j = M (2 - 2^-j)``, ``M = m sup mu0``.

    ``S_j`` is the ``L^{7/4}(L^{7/2})`` norm of the indicator of ``{mu > k_j}``;
    the equal quantity ``|chi|_{L^2(L^4)}^{8/7}`` is kept alongside as a check.
    """
    if not m > 1:
        raise ValueError(f"m must exceed 1, got {m}")
    mu0_sup = float(np.max(np.abs(traj.initial.mu)))
    if mu0_sup == 0:
        raise DegenerateError("sup |mu0| = 0; levels collapse")
    M = m * mu0_sup
    k = degiorgi_levels(M, j_max)
    mus = [s.mu for s in traj.states]
    S, S_alt, tn = [], [], []
    for kj in k:
        chi = [(mu > kj).astype(float) for mu in mus]
        S.append(mixed_norm(traj, chi, 7 / 4, 7 / 2))
        S_alt.append(mixed_norm(traj, chi, 2.0, 4.0) ** (8 / 7))
        tn.append(triple_norm(traj, [np.maximum(mu - kj, 0.0) for mu in mus]))
    S = np.array(S)
    zeros = np.flatnonzero(S == 0)
    sup_mu = float(max(np.max(mu) for mu in mus))
    return DeGiorgiReport(
        M=M, m=m, mu0_sup=mu0_sup, k_levels=k, S_levels=S,
        S_levels_l2l4=np.array(S_alt), triple_norms=np.array(tn),
        sup_mu_observed=sup_mu,
        first_zero_level=int(zeros[0]) if zeros.size else None,
        bounded=sup_mu <= 2.0 * M,
    )


def sobolev_ratio(traj: Trajectory, k: float) -> float:
    """``|(mu-k)^+|_{L^2(L^4)} / triple_norm((mu-k)^+)``, 0 when the truncation vanishes."""
    v = [np.maximum(s.mu - k, 0.0) for s in traj.states]
    den = triple_norm(traj, v)
    return mixed_norm(traj, v, 2.0, 4.0) / den if den > 0 else 0.0


# -- confinement of rho -----------------------------------------------------

@dataclass(frozen=True)
class ConfinementReport:
    r_lower_candidate: float
    r_upper_candidate: float
    observed_min_rho: float
    observed_max_rho: float
    lower_bound: float
    upper_bound: float
    inf_g: float
    sup_g: float

    @property
    def respects_lower(self) -> bool:
        return self.observed_min_rho >= self.lower_bound - 1e-12

    @property
    def respects_upper(self) -> bool:
        return self.observed_max_rho <= self.upper_bound + 1e-12


def confinement_bounds(traj: Trajectory, spec: Optional[PotentialSpec] = None) -> ConfinementReport:
    """Comparison levels for ``rho`` from the range of ``g = mu - f2'(rho)``.

    ``r_lower_candidate`` is the largest ``r`` with ``f1'(r) <= inf g`` and
    ``r_upper_candidate`` the smallest with ``f1'(r) >= sup g``. The bounds
    actually expected are ``min(r_lower, min rho0)`` and ``max(r_upper, max rho0)``.
    """
    spec = spec or traj.cfg.potential
    gs = [s.mu - spec.smooth_prime(s.rho) for s in traj.states]
    inf_g = float(min(np.min(g) for g in gs))
    sup_g = float(max(np.max(g) for g in gs))
    r_lo = convex_prime_inverse(spec, inf_g)
    r_hi = convex_prime_inverse(spec, sup_g)
    rho0 = traj.initial.rho
    return ConfinementReport(
        r_lower_candidate=r_lo,
        r_upper_candidate=r_hi,
        observed_min_rho=float(min(np.min(s.rho) for s in traj.states)),
        observed_max_rho=float(max(np.max(s.rho) for s in traj.states)),
        lower_bound=min(r_lo, float(np.min(rho0))),
        upper_bound=max(r_hi, float(np.max(rho0))),
        inf_g=inf_g,
        sup_g=sup_g,
    )
