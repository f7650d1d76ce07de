import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from nschsim.grid import Grid


def cos_mode(grid):
    c = np.ones(grid.shape)
    for x, L in zip(grid.coords(), grid.lengths):
        c = c * np.cos(np.pi * x / L)
    return c


def test_geometry():
    g = Grid((10, 4), (2.0, 1.0))
    assert g.dim == 2 and g.shape == (11, 5) and g.size == 55
    assert g.h == pytest.approx((0.2, 0.25))
    assert g.volume == 2.0
    assert Grid.uniform(1, 8) == Grid((8,), (1.0,))


@pytest.mark.parametrize("cells,lengths", [((4, 4, 4), (1, 1, 1)), ((0,), (1.0,)), ((4,), (-1.0,)), ((4,), (1, 1))])
def test_invalid_grids(cells, lengths):
    with pytest.raises(ValueError):
        Grid(cells, lengths)


def test_field_checks(grid1d):
    with pytest.raises(ValueError):
        grid1d.check_field(np.zeros(3))
    bad = grid1d.full(0.0)
    bad[3] = np.nan
    with pytest.raises(ValueError):
        grid1d.check_field(bad)


@pytest.mark.parametrize("grid", [Grid((17,), (1.3,)), Grid((7, 9), (1.0, 2.0))])
def test_constants_in_kernel(grid):
    assert np.all(grid.laplacian_neumann(grid.full(3.7)) == 0.0)
    # the assembled matrix agrees up to the rounding of summed 1/h^2 entries
    A = grid.laplacian_matrix
    scale = sum(4 / h**2 for h in grid.h)
    assert np.max(np.abs(A @ np.ones(grid.size))) <= 1e-15 * scale * 8


@pytest.mark.parametrize("n", [16, 33, 128])
def test_cosine_discrete_eigenvalue(n):
    g = Grid((n,), (1.0,))
    c = cos_mode(g)
    h = g.h[0]
    exact = -(2 / h**2) * (1 - math.cos(math.pi * h))
    assert np.max(np.abs(g.laplacian_neumann(c) - exact * c)) < 1e-9 * n**2


def test_second_order_1d():
    errs = []
    for n in (32, 64, 128, 256):
        g = Grid((n,), (1.0,))
        c = cos_mode(g)
        errs.append(np.max(np.abs(g.laplacian_neumann(c) + math.pi**2 * c)))
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all((ratios > 3.9) & (ratios < 4.1))


def test_second_order_2d():
    errs = []
    for n in (16, 32, 64):
        g = Grid((n, n), (1.0, 1.0))
        c = cos_mode(g)
        errs.append(np.max(np.abs(g.laplacian_neumann(c) + 2 * math.pi**2 * c)))
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all((ratios > 3.8) & (ratios < 4.2))


def test_integrate_examples():
    g = Grid((100,), (1.0,))
    x, = g.coords()
    assert g.integrate(g.full(1.0)) == pytest.approx(1.0, abs=1e-14)
    assert g.integrate(x) == pytest.approx(0.5, abs=1e-14)
    assert abs(g.integrate(x**2) - 1 / 3) < 1e-4
    # trapezoid defect h^2/12 (f'(1) - f'(0))
    assert g.integrate(x**2) - 1 / 3 == pytest.approx(g.h[0] ** 2 / 6, rel=1e-9)


def test_integrate_2d_corners():
    g = Grid((3, 2), (1.5, 1.0))
    w = g.weights
    assert w[0, 0] == pytest.approx(0.25 * 0.5 * 0.5)
    assert w.sum() == pytest.approx(1.5)
    x, y = g.coords()
    assert g.integrate(x * y) == pytest.approx(1.5**2 / 2 * 0.5)


def test_grad_sq_examples():
    g = Grid((50,), (1.0,))
    x, = g.coords()
    assert g.grad_sq_integral(g.full(2.0)) == 0.0
    assert g.grad_sq_integral(-3.0 * x) == pytest.approx(9.0, rel=1e-13)
    errs = []
    for n in (32, 64, 128):
        gn = Grid((n,), (1.0,))
        errs.append(abs(gn.grad_sq_integral(cos_mode(gn)) - math.pi**2 / 2))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.05)


def test_lq_examples():
    g = Grid((101,), (1.0,))
    x, = g.coords()
    assert g.lq_norm(g.full(-2.5), 2) == pytest.approx(2.5)
    # 102 nodes: the first 51 carry trapezoid mass 50.5 h = 1/2 exactly
    chi = np.zeros(g.shape)
    chi[:51] = 1.0
    assert g.lq_norm(chi, 4) == pytest.approx(0.5 ** 0.25, rel=1e-14)
    assert g.lq_norm(chi, 1) == pytest.approx(0.5, rel=1e-14)
    v = np.linspace(-3, 1, g.size)
    assert g.lq_norm(v, np.inf) == 3.0


def test_lq_indicator_refined():
    fine = Grid((2000,), (1.0,))
    xf, = fine.coords()
    assert fine.lq_norm((xf <= 0.5).astype(float), 4) == pytest.approx(0.5 ** 0.25, abs=1e-3)


def test_lq_rejects_small_q(grid1d):
    with pytest.raises(ValueError):
        grid1d.lq_norm(grid1d.full(1.0), 0.5)


fields1d = arrays(np.float64, (21,), elements=st.floats(-1, 1))
fields2d = arrays(np.float64, (6, 8), elements=st.floats(-1, 1))


@given(fields1d, fields1d)
def test_summation_by_parts_1d(u, v):
    g = Grid((20,), (1.7,))
    lhs = g.integrate(u * g.laplacian_neumann(v))
    rhs = -g.grad_inner(u, v)
    scale = 1 + abs(g.integrate(np.abs(u * g.laplacian_neumann(v))))
    assert abs(lhs - rhs) <= 1e-12 * scale
    assert g.grad_inner(u, v) == pytest.approx(g.grad_inner(v, u), abs=1e-12 * scale)


@given(fields2d, fields2d)
def test_summation_by_parts_2d(u, v):
    g = Grid((5, 7), (1.0, 0.6))
    lhs = g.integrate(u * g.laplacian_neumann(v))
    scale = 1 + abs(g.integrate(np.abs(u * g.laplacian_neumann(v))))
    assert abs(lhs + g.grad_inner(u, v)) <= 1e-12 * scale


@given(fields1d)
def test_dirichlet_form_nonnegative(u):
    g = Grid((20,), (1.0,))
    assert g.grad_sq_integral(u) >= 0


@given(arrays(np.float64, (33,), elements=st.floats(-1, 1)))
def test_lq_monotone_in_q(u):
    g = Grid((32,), (1.0,))
    qs = [1, 1.5, 2, 3.5, 4, 7, np.inf]
    norms = [g.lq_norm(u, q) for q in qs]
    assert all(a <= b + 1e-12 for a, b in zip(norms, norms[1:]))


@pytest.mark.parametrize("grid", [Grid((40,), (2.0,)), Grid((9, 11), (1.0, 1.5))])
def test_solve_shifted(grid):
    rng = np.random.default_rng(3)
    diag = 1.0 + rng.random(grid.shape)
    x_true = rng.standard_normal(grid.shape)
    rhs = diag * x_true - 0.01 * grid.laplacian_neumann(x_true)
    x = grid.solve_shifted(diag, 0.01, rhs)
    assert np.max(np.abs(x - x_true)) < 1e-11
