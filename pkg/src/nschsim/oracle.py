"""Reference solutions for spatially homogeneous data.

For constant fields the Laplacians drop out and the system reduces to::

    (eps + 2 rho) mu' + mu rho' = 0,    delta rho' + f'(rho) = mu

whose first equation conserves ``(eps/2 + rho) mu^2``. The primary path
integrates only ``rho``, reconstructing ``mu`` from that invariant; the
unreduced pair is integrated separately as a cross-check. Both use an
adaptive explicit Runge-Kutta method, unrelated to the implicit production
scheme.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .errors import SolverError
from .stepper import SolverConfig

ORACLE_METHOD = "RK45"


@dataclass
class HomogeneousTrajectory:
    times: np.ndarray
    mu_values: np.ndarray
    rho_values: np.ndarray
    invariant_values: np.ndarray
    dense: Optional[Callable] = None

    def at(self, t):
        """``(mu, rho)`` at time(s) ``t`` via the integrator's dense output."""
        t = np.asarray(t, dtype=float)
        if self.dense is None:
            return (np.full(t.shape, self.mu_values[0]), np.full(t.shape, self.rho_values[0]))
        mu, rho = self.dense(t)
        return mu, rho


def _check(rho0, mu0):
    if not 0 < rho0 < 1:
        raise ValueError(f"rho0 must lie in (0, 1), got {rho0}")
    if not mu0 >= 0:
        raise ValueError(f"mu0 must be nonnegative, got {mu0}")


def homogeneous_oracle(rho0: float, mu0: float, cfg: SolverConfig, t_end: float,
                       rtol: float = 1e-10, n_samples: int = 201) -> HomogeneousTrajectory:
    """Integrate the invariant-reduced scalar ODE for ``rho``.

    ``mu(t) = mu0 * sqrt((eps/2 + rho0) / (eps/2 + rho(t)))``, so ``mu >= 0``
    and the invariant hold by construction.
    """
    _check(rho0, mu0)
    eps, delta, pot = cfg.eps, cfg.delta, cfg.potential
    c = (0.5 * eps + rho0) * mu0**2

    def mu_of(rho):
        return np.sqrt(c / (0.5 * eps + rho))

    times = np.linspace(0.0, t_end, n_samples)
    if t_end == 0:
        rho = np.full(n_samples, float(rho0))
        mu = np.full(n_samples, float(mu0))
        return HomogeneousTrajectory(times, mu, rho, (0.5 * eps + rho) * mu**2)

    def rhs(t, y):
        # trial stages may overshoot (0, 1); the NaN they produce makes the
        # controller reject the step
        with np.errstate(invalid="ignore", divide="ignore"):
            return [(mu_of(y[0]) - pot.prime(y[0])) / delta]

    sol = solve_ivp(rhs, (0.0, t_end), [rho0], method=ORACLE_METHOD, rtol=rtol,
                    atol=1e-2 * rtol, dense_output=True)
    if not sol.success:
        raise SolverError(f"oracle integration failed: {sol.message}")
    rho = sol.sol(times)[0]
    mu = mu_of(rho)

    def dense(t):
        r = sol.sol(t)[0]
        return mu_of(r), r

    return HomogeneousTrajectory(times, mu, rho, (0.5 * eps + rho) * mu**2, dense)


def homogeneous_oracle_coupled(rho0: float, mu0: float, cfg: SolverConfig, t_end: float,
                               rtol: float = 1e-10, n_samples: int = 201) -> HomogeneousTrajectory:
    """Integrate the unreduced ``(mu, rho)`` pair directly."""
    _check(rho0, mu0)
    eps, delta, pot = cfg.eps, cfg.delta, cfg.potential
    times = np.linspace(0.0, t_end, n_samples)
    if t_end == 0:
        mu = np.full(n_samples, float(mu0))
        rho = np.full(n_samples, float(rho0))
        return HomogeneousTrajectory(times, mu, rho, (0.5 * eps + rho) * mu**2)

    def rhs(t, y):
        mu, rho = y
        with np.errstate(invalid="ignore", divide="ignore"):
            drho = (mu - pot.prime(rho)) / delta
        return [-mu * drho / (eps + 2.0 * rho), drho]

    sol = solve_ivp(rhs, (0.0, t_end), [mu0, rho0], method=ORACLE_METHOD, rtol=rtol,
                    atol=1e-2 * rtol, dense_output=True)
    if not sol.success:
        raise SolverError(f"oracle integration failed: {sol.message}")
    mu, rho = sol.sol(times)
    return HomogeneousTrajectory(times, mu, rho, (0.5 * eps + rho) * mu**2,
                                 lambda t: tuple(sol.sol(t)))
