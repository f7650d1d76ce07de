"""Split double-well potential ``f = f1 + f2`` on (0, 1) and its Yosida machinery.

``f1`` is convex with a derivative that blows up at both endpoints, ``f2`` is
smooth with bounded curvature. The default family is the logarithmic one::

    f1(r) = theta * (r ln r + (1 - r) ln(1 - r))
    f2(r) = theta_c * r * (1 - r)

which has two wells exactly when ``theta_c > 2 * theta``.

All ``PotentialSpec`` methods are vectorized over numpy arrays and perform no
domain checks; ``eval_potential`` is the guarded scalar entry point.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import PotentialDomainError, PotentialRangeError, ResolventError

#: evaluations closer than this to 0 or 1 are refused by ``eval_potential``
ENDPOINT_GUARD = 1e-14
RESOLVENT_TOL = 1e-12
_EPS = np.finfo(float).eps

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class PotentialSpec:
    """Parameters of the split potential.

    Parameters
    ----------
    theta : float
        Strength of the singular convex part, > 0.
    theta_c : float
        Strength of the smooth concave part, >= 0.
    f1, df1, d2f1 : callable, optional
        Replacement for the convex part and its first two derivatives.
        Supply all three or none.
    f2, df2, d2f2 : callable, optional
        Replacement for the smooth part, same convention.
    """

    theta: float = 1.0
    theta_c: float = 3.0
    f1: Optional[ArrayFn] = None
    df1: Optional[ArrayFn] = None
    d2f1: Optional[ArrayFn] = None
    f2: Optional[ArrayFn] = None
    df2: Optional[ArrayFn] = None
    d2f2: Optional[ArrayFn] = None

    def __post_init__(self):
        if not self.theta > 0:
            raise ValueError(f"theta must be positive, got {self.theta}")
        if not self.theta_c >= 0:
            raise ValueError(f"theta_c must be nonnegative, got {self.theta_c}")
        for group in (("f1", "df1", "d2f1"), ("f2", "df2", "d2f2")):
            given = [getattr(self, name) is not None for name in group]
            if any(given) and not all(given):
                raise ValueError(f"custom potential needs all of {group}")

    # convex singular part
    def convex(self, r):
        if self.f1 is not None:
            return self.f1(r)
        r = np.asarray(r, dtype=float)
        return self.theta * (r * np.log(r) + (1.0 - r) * np.log1p(-r))

    def convex_prime(self, r):
        if self.df1 is not None:
            return self.df1(r)
        r = np.asarray(r, dtype=float)
        return self.theta * (np.log(r) - np.log1p(-r))

    def convex_second(self, r):
        if self.d2f1 is not None:
            return self.d2f1(r)
        r = np.asarray(r, dtype=float)
        return self.theta / (r * (1.0 - r))

    # smooth perturbation
    def smooth(self, r):
        if self.f2 is not None:
            return self.f2(r)
        r = np.asarray(r, dtype=float)
        return self.theta_c * r * (1.0 - r)

    def smooth_prime(self, r):
        if self.df2 is not None:
            return self.df2(r)
        r = np.asarray(r, dtype=float)
        return self.theta_c * (1.0 - 2.0 * r)

    def smooth_second(self, r):
        if self.d2f2 is not None:
            return self.d2f2(r)
        r = np.asarray(r, dtype=float)
        return np.full_like(r, -2.0 * self.theta_c)

    # full potential
    def value(self, r):
        return self.convex(r) + self.smooth(r)

    def prime(self, r):
        return self.convex_prime(r) + self.smooth_prime(r)

    def second(self, r):
        return self.convex_second(r) + self.smooth_second(r)

    @property
    def is_double_well(self) -> bool:
        if self.f1 is not None or self.f2 is not None:
            return bool(np.min(self.second(np.linspace(0.01, 0.99, 999))) < 0)
        return self.theta_c > 2.0 * self.theta

    def check_assumptions(self, n: int = 10_001, blowup: float = 1e3) -> float:
        """Sample the structural hypotheses on a grid of (0, 1).

        Checks convexity of the singular part, a finite curvature bound for the
        smooth part and divergence of ``convex_prime`` at both ends. Returns the
        sampled bound ``max |smooth_second|``; raises ``ValueError`` on failure.
        """
        r = np.linspace(0.0, 1.0, n + 2)[1:-1]
        if np.any(self.convex_second(r) < 0):
            raise ValueError("convex part is not convex on (0, 1)")
        bound = float(np.max(np.abs(self.smooth_second(r))))
        if not np.isfinite(bound):
            raise ValueError("smooth part has unbounded curvature")
        ends = np.array([1e-12, 1.0 - 1e-12])
        d = self.convex_prime(ends)
        if not (d[0] < -blowup / 100 and d[1] > blowup / 100):
            raise ValueError("convex_prime does not diverge at the endpoints")
        return bound


@dataclass(frozen=True)
class PotentialEval:
    f: float
    f_prime: float
    f1_prime: float
    f1_second: float
    f2_prime: float
    f2_second: float

    @property
    def f_second(self) -> float:
        return self.f1_second + self.f2_second


def _check_unit_interval(r: float) -> float:
    r = float(r)
    if not 0.0 < r < 1.0:
        raise PotentialDomainError(f"r={r!r} is outside (0, 1)")
    if r < ENDPOINT_GUARD or r > 1.0 - ENDPOINT_GUARD:
        raise PotentialRangeError(f"r={r!r} is within {ENDPOINT_GUARD} of an endpoint")
    return r


def eval_potential(spec: PotentialSpec, r: float) -> PotentialEval:
    """Evaluate the potential and its split derivatives at one point of (0, 1)."""
    r = _check_unit_interval(r)
    f1p = float(spec.convex_prime(r))
    f2p = float(spec.smooth_prime(r))
    return PotentialEval(
        f=float(spec.value(r)),
        f_prime=f1p + f2p,
        f1_prime=f1p,
        f1_second=float(spec.convex_second(r)),
        f2_prime=f2p,
        f2_second=float(spec.smooth_second(r)),
    )


def _increasing_root(phi, dphi, target, start, tol=RESOLVENT_TOL, max_iter=200):
    """Vectorized safeguarded Newton for ``phi(y) = target`` on (0, 1).

    ``phi`` must be strictly increasing and cover the target values. Newton
    steps that leave the current bracket are replaced by bisection, and a
    stalled Newton step (steep side of a singular ``phi``) is only accepted
    once ``[y - tol, y + tol]`` is seen to straddle the root.
    """
    target = np.asarray(target, dtype=float)
    lo = np.full(target.shape, _EPS)
    hi = np.full(target.shape, 1.0 - _EPS)
    y = np.clip(np.broadcast_to(np.asarray(start, dtype=float), target.shape), lo, hi)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for _ in range(max_iter):
            F = phi(y) - target
            hi = np.where(F > 0, y, hi)
            lo = np.where(F <= 0, y, lo)
            mid = 0.5 * (lo + hi)
            trial = y - F / dphi(y)
            ok = (trial >= lo) & (trial <= hi)
            y_new = np.where(F == 0, y, np.where(ok, trial, mid))
            small = np.abs(y_new - y) <= 1e-2 * tol
            below = phi(np.clip(y_new - tol, _EPS, 1.0 - _EPS)) - target <= 0
            above = phi(np.clip(y_new + tol, _EPS, 1.0 - _EPS)) - target >= 0
            verified = small & below & above
            done = (F == 0) | (hi - lo <= tol) | verified
            y = np.where(small & ~done, mid, y_new)
            if np.all(done):
                return y
    raise ResolventError(f"root bracket did not shrink below {tol} in {max_iter} iterations")


def yosida_resolvent(spec: PotentialSpec, r, lam: float):
    """Resolvent of the monotone graph ``convex_prime``.

    Returns ``y`` in (0, 1) with ``y + lam * convex_prime(y) = r``. ``r`` may be
    any real (or array of reals).
    """
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    scalar = np.ndim(r) == 0
    y = _increasing_root(
        lambda y: y + lam * spec.convex_prime(y),
        lambda y: 1.0 + lam * spec.convex_second(y),
        r,
        start=r,
    )
    return float(y) if scalar else y


def yosida_f1(spec: PotentialSpec, r, lam: float):
    """Moreau envelope ``f1(J) + (r - J)^2 / (2 lam)``, an antiderivative of ``yosida_f1_prime``."""
    y = yosida_resolvent(spec, r, lam)
    out = spec.convex(y) + (np.asarray(r, dtype=float) - y) ** 2 / (2.0 * lam)
    return float(out) if np.ndim(r) == 0 else out


def yosida_f1_prime(spec: PotentialSpec, r, lam: float):
    """Yosida approximation ``(r - J(r)) / lam`` of ``convex_prime``.

    Two equal expressions are available. With ``J`` known to ``d = RESOLVENT_TOL``
    (plus rounding), the quotient is off by about ``(d + eps |r|) / lam`` and
    ``convex_prime(J)`` by about ``convex_second(J) (d + eps J)``; the smaller
    estimate picks the expression node by node.
    """
    rr = np.asarray(r, dtype=float)
    y = yosida_resolvent(spec, r, lam)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        c = spec.convex_second(y)
        err_quotient = (RESOLVENT_TOL + _EPS * np.abs(rr)) / lam
        err_exact = c * (RESOLVENT_TOL + _EPS * y)
        quotient = ~(err_exact < err_quotient)
        exact = spec.convex_prime(y)
    out = np.where(quotient, (rr - y) / lam, exact)
    return float(out) if np.ndim(r) == 0 else out


def yosida_f1_second(spec: PotentialSpec, r, lam: float):
    """Derivative of ``yosida_f1_prime`` in ``r``."""
    y = yosida_resolvent(spec, r, lam)
    c = spec.convex_second(y)
    out = c / (1.0 + lam * c)
    return float(out) if np.ndim(r) == 0 else out


def convex_prime_inverse(spec: PotentialSpec, level):
    """The point of (0, 1) where ``convex_prime`` equals ``level``."""
    scalar = np.ndim(level) == 0
    y = _increasing_root(spec.convex_prime, spec.convex_second, level, start=0.5)
    return float(y) if scalar else y
