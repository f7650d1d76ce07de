"""Uniform tensor meshes with zero-flux boundaries.

Fields are plain numpy arrays of shape ``grid.shape`` (nodes per axis, in
row-major order). The Laplacian uses mirrored ghost nodes (ghost = first
interior value) and integrals use trapezoidal weights; with this pairing the
discrete integration-by-parts identity

    integrate(u * laplacian_neumann(v)) == -grad_inner(u, v)

holds to rounding, and constants lie exactly in the Laplacian kernel.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.linalg import solve_banded
from scipy.sparse.linalg import spsolve


@dataclass(frozen=True)
class Grid:
    """Uniform mesh of ``cells[i]`` cells on ``[0, lengths[i]]`` per axis."""

    cells: tuple
    lengths: tuple

    def __post_init__(self):
        cells = tuple(int(c) for c in np.atleast_1d(self.cells))
        lengths = tuple(float(L) for L in np.atleast_1d(self.lengths))
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "lengths", lengths)
        if len(cells) not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {len(cells)}")
        if len(lengths) != len(cells):
            raise ValueError("cells and lengths must have the same length")
        if any(c < 1 for c in cells):
            raise ValueError(f"need at least one cell per axis, got {cells}")
        if any(not (L > 0 and np.isfinite(L)) for L in lengths):
            raise ValueError(f"lengths must be positive, got {lengths}")

    @classmethod
    def uniform(cls, dim: int, cells: int | Sequence[int], lengths: float | Sequence[float] = 1.0):
        cells = np.broadcast_to(np.atleast_1d(cells), (dim,))
        lengths = np.broadcast_to(np.atleast_1d(lengths), (dim,))
        return cls(tuple(cells), tuple(lengths))

    @property
    def dim(self) -> int:
        return len(self.cells)

    @property
    def h(self) -> tuple:
        return tuple(L / n for L, n in zip(self.lengths, self.cells))

    @property
    def shape(self) -> tuple:
        return tuple(n + 1 for n in self.cells)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    @cached_property
    def axes(self) -> tuple:
        return tuple(np.linspace(0.0, L, n + 1) for L, n in zip(self.lengths, self.cells))

    def coords(self) -> tuple:
        """Nodal coordinate arrays, each of shape ``self.shape``."""
        return tuple(np.meshgrid(*self.axes, indexing="ij"))

    @cached_property
    def weights(self) -> np.ndarray:
        w = np.ones(self.shape)
        for axis, h in enumerate(self.h):
            w1 = np.full(self.shape[axis], h)
            w1[0] = w1[-1] = 0.5 * h
            w = w * w1.reshape([-1 if a == axis else 1 for a in range(self.dim)])
        return w

    def check_field(self, u, name: str = "field") -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape != self.shape:
            raise ValueError(f"{name} has shape {u.shape}, grid expects {self.shape}")
        if not np.all(np.isfinite(u)):
            raise ValueError(f"{name} has non-finite values")
        return u

    def full(self, value: float) -> np.ndarray:
        return np.full(self.shape, float(value))

    # operators
    def laplacian_neumann(self, u: np.ndarray) -> np.ndarray:
        out = np.zeros(self.shape)
        for axis, h in enumerate(self.h):
            pad = [(1, 1) if a == axis else (0, 0) for a in range(self.dim)]
            up = np.pad(u, pad, mode="reflect")
            hi = up[tuple(slice(2, None) if a == axis else slice(None) for a in range(self.dim))]
            lo = up[tuple(slice(None, -2) if a == axis else slice(None) for a in range(self.dim))]
            out += (hi - 2.0 * u + lo) / h**2
        return out

    def integrate(self, u: np.ndarray) -> float:
        return float(np.sum(self.weights * u))

    def mean(self, u: np.ndarray) -> float:
        return self.integrate(u) / self.volume

    def _edge_weights(self, axis: int) -> np.ndarray:
        # edge length along `axis` times the trapezoid weight across the others
        w = np.ones([n if a != axis else n - 1 for a, n in enumerate(self.shape)])
        for other, h in enumerate(self.h):
            if other == axis:
                w = w * h
                continue
            w1 = np.full(self.shape[other], h)
            w1[0] = w1[-1] = 0.5 * h
            w = w * w1.reshape([-1 if a == other else 1 for a in range(self.dim)])
        return w

    def grad_inner(self, u: np.ndarray, v: np.ndarray) -> float:
        """Discrete Dirichlet form: sum over edges of difference quotients."""
        total = 0.0
        for axis, h in enumerate(self.h):
            du = np.diff(u, axis=axis) / h
            dv = np.diff(v, axis=axis) / h
            total += float(np.sum(self._edge_weights(axis) * du * dv))
        return total

    def grad_sq_integral(self, u: np.ndarray) -> float:
        return self.grad_inner(u, u)

    def lq_norm(self, u: np.ndarray, q: float) -> float:
        if q == np.inf:
            return float(np.max(np.abs(u)))
        if not q >= 1:
            raise ValueError(f"q must be >= 1, got {q}")
        return self.integrate(np.abs(u) ** q) ** (1.0 / q)

    def l2_norm(self, u: np.ndarray) -> float:
        return self.lq_norm(u, 2)

    # matrices and solves
    def _laplacian_1d(self, axis: int) -> sp.csr_matrix:
        n = self.shape[axis]
        h = self.h[axis]
        main = np.full(n, -2.0)
        upper = np.ones(n - 1)
        lower = np.ones(n - 1)
        upper[0] = 2.0
        lower[-1] = 2.0
        return sp.diags([lower, main, upper], [-1, 0, 1], format="csr") / h**2

    @cached_property
    def laplacian_matrix(self) -> sp.csr_matrix:
        """Sparse matrix of ``laplacian_neumann`` acting on flattened fields."""
        if self.dim == 1:
            return self._laplacian_1d(0)
        nx, ny = self.shape
        return (sp.kron(self._laplacian_1d(0), sp.identity(ny))
                + sp.kron(sp.identity(nx), self._laplacian_1d(1))).tocsr()

    def solve_shifted(self, diag: np.ndarray, coef: float, rhs: np.ndarray) -> np.ndarray:
        """Solve ``diag * x - coef * laplacian_neumann(x) = rhs`` for ``x``.

        ``diag`` is a nodal array (or scalar). 1D uses a banded LU, 2D a sparse
        direct solve.
        """
        diag = np.broadcast_to(np.asarray(diag, dtype=float), self.shape)
        if self.dim == 1:
            n = self.shape[0]
            s = coef / self.h[0] ** 2
            ab = np.zeros((3, n))
            ab[0, 1:] = -s
            ab[0, 1] = -2.0 * s
            ab[1] = diag + 2.0 * s
            ab[2, :-1] = -s
            ab[2, -2] = -2.0 * s
            return solve_banded((1, 1), ab, rhs, check_finite=False)
        A = sp.diags(diag.ravel()) - coef * self.laplacian_matrix
        return spsolve(A.tocsc(), rhs.ravel()).reshape(self.shape)
