"""Damped Newton for nodal systems whose Jacobian is ``diag(d) - laplacian``."""
from __future__ import annotations

import numpy as np

from .errors import ConfinementLost, NewtonDiverged

#: iterates must stay this far inside (0, 1)
INTERIOR_GUARD = 1e-14
MAX_HALVINGS = 60
#: per iteration a node keeps at least this share of its distance to 0 and to 1
BOUNDARY_FRACTION = 0.1
_EPS = np.finfo(float).eps


def is_interior(x: np.ndarray) -> bool:
    return bool(np.all(x > INTERIOR_GUARD) and np.all(x < 1.0 - INTERIOR_GUARD))


def _line_search(x, dx, r, E, residual, energy):
    """First halving of ``dx`` that is interior and decreases the merit.

    The merit is ``energy`` when given, else the sup-norm residual. Trial
    points are clipped node by node so no component crosses more than
    ``1 - BOUNDARY_FRACTION`` of its gap to an endpoint; a node sitting close
    to 0 or 1 can then not be pinned there by a large move of a neighbour.
    """
    lo = BOUNDARY_FRACTION * x
    hi = 1.0 - BOUNDARY_FRACTION * (1.0 - x)
    step, seen_interior = 1.0, False
    for _ in range(MAX_HALVINGS):
        trial = np.clip(x + step * dx, lo, hi)
        if is_interior(trial):
            seen_interior = True
            Ft = residual(trial)
            rt = float(np.max(np.abs(Ft)))
            if energy is None:
                if rt < r:
                    return trial, Ft, rt, None, True
            else:
                Et = energy(trial)
                # near the solution energy changes drop below rounding; then
                # a residual decrease at unchanged energy is also accepted
                if Et < E or (Et <= E + 1e-13 * abs(E) and rt < r):
                    return trial, Ft, rt, Et, True
        step *= 0.5
    return None, None, None, None, seen_interior


def damped_newton(grid, x0, residual, jac_diag, tol, max_iter, scale=None, energy=None):
    """Solve ``residual(x) = 0`` keeping ``x`` strictly inside (0, 1).

    Parameters
    ----------
    residual, jac_diag : callable
        Nodal residual ``F(x)`` and the diagonal ``d(x)`` of its Jacobian
        ``diag(d) - laplacian``.
    scale : callable, optional
        Magnitude of the largest term in the residual; residuals below
        ``16 * eps * scale(x)`` count as converged (rounding floor).
    energy : callable, optional
        Functional whose weighted gradient is ``F``. Used as the line-search
        merit when given; if no halving decreases it, the sup-norm residual
        is tried instead.

    Returns ``(x, iterations, residual_sup)``.
    """
    x = np.array(x0, dtype=float)
    F = residual(x)
    r = float(np.max(np.abs(F)))
    E = energy(x) if energy is not None else None
    for it in range(max_iter + 1):
        floor = 16.0 * _EPS * scale(x) if scale is not None else 0.0
        if r <= max(tol, floor):
            return x, it, r
        if it == max_iter:
            break
        dx = grid.solve_shifted(jac_diag(x), 1.0, -F)
        if not np.all(np.isfinite(dx)):
            raise NewtonDiverged(f"singular Newton system at iteration {it}")
        trial, Ft, rt, Et, seen = _line_search(x, dx, r, E, residual, energy)
        if trial is None and energy is not None:
            trial, Ft, rt, _, seen_r = _line_search(x, dx, r, None, residual, None)
            seen = seen or seen_r
            Et = energy(trial) if trial is not None else None
        if trial is None:
            if np.max(np.abs(dx)) <= 1e-14 * max(1.0, float(np.max(np.abs(x)))):
                return x, it, r
            if not seen:
                raise ConfinementLost(
                    f"damping could not keep iterate inside (0, 1) (residual {r:.3e})")
            raise NewtonDiverged(f"line search stalled at residual {r:.3e}")
        x, F, r, E = trial, Ft, rt, Et
    raise NewtonDiverged(f"no convergence in {max_iter} iterations (residual {r:.3e})")
