"""Grid construction, quadrature, and stencil behavior."""

import numpy as np
import pytest

from fisherhydro.grid import (DIRICHLET, PERIODIC, Field, Grid, GridError,
                              derivative, integrate, laplacian_tridiagonal,
                              link_difference, link_weights, quadrature_weights,
                              scatter_link_div)


def test_line_grid_spacing_and_endpoints():
    g = Grid.line(-2.0, 2.0, 9)
    x = g.coords()[0]
    assert g.bc == DIRICHLET
    assert g.dxs == (0.5,)
    assert x[0] == -2.0 and x[-1] == 2.0


def test_periodic_grid_omits_right_endpoint():
    g = Grid.line(-2.0, 2.0, 8, bc=PERIODIC)
    x = g.coords()[0]
    assert g.dxs == (0.5,)
    assert x[-1] == pytest.approx(1.5)
    assert len(x) == 8


def test_integrate_constant_exact():
    # summation order decides the last bit, so allow one ulp around 1.0
    g = Grid.line(0.0, 1.0, 101)
    assert integrate(Field(g, np.ones(101))) == pytest.approx(1.0, abs=2e-16)


def test_integrate_odd_function_vanishes():
    g = Grid.line(-1.0, 1.0, 201)
    x = g.coords()[0]
    assert abs(integrate(Field(g, x))) <= 1e-14


def test_integrate_gaussian_mass():
    g = Grid.line(-10.0, 10.0, 1024)
    x = g.coords()[0]
    P = np.exp(-x * x / 2.0) / np.sqrt(2.0 * np.pi)
    assert integrate(Field(g, P)) == pytest.approx(1.0, abs=1e-8)


def test_derivative_exact_on_linear_fields():
    g = Grid.line(0.0, 1.0, 33)
    f = Field(g, 3.0 * g.coords()[0] + 1.0)
    assert np.max(np.abs(derivative(f).values - 3.0)) == 0.0


def test_discrete_fundamental_theorem():
    g = Grid.line(-3.0, 3.0, 301)
    x = g.coords()[0]
    f = Field(g, np.sin(x) * np.exp(-x * x / 4.0))
    flux = f.values[-1] - f.values[0]
    dx = g.dxs[0]
    assert integrate(derivative(f)) == pytest.approx(flux, abs=5.0 * dx ** 2)


def test_derivative_refinement_order():
    errs = []
    for n in (129, 257):
        g = Grid.line(-np.pi, np.pi, n)
        x = g.coords()[0]
        err = np.abs(derivative(Field(g, np.sin(x))).values[2:-2] -
                     np.cos(x)[2:-2])
        errs.append(err.max())
    order = np.log2(errs[0] / errs[1])
    assert order >= 1.9


def test_periodic_derivative_has_no_seam():
    g = Grid.line(0.0, 2.0 * np.pi, 128, bc=PERIODIC)
    x = g.coords()[0]
    err = np.abs(derivative(Field(g, np.sin(x))).values - np.cos(x))
    # the centered stencil gives |cos x| (1 - sin(dx)/dx) everywhere; a
    # broken seam would show up as an O(dx) spike at the wrap cells
    assert err.max() <= g.dxs[0] ** 2 / 6.0 * 1.01


def test_second_derivative_of_quadratic():
    g = Grid.line(-1.0, 1.0, 65)
    x = g.coords()[0]
    d2 = derivative(Field(g, x * x), order=2).values
    assert np.max(np.abs(d2[1:-1] - 2.0)) <= 1e-10


def test_laplacian_tridiagonal_matches_stencil():
    g = Grid.line(-1.0, 1.0, 33)
    x = g.coords()[0]
    d, e = laplacian_tridiagonal(g)
    v = np.exp(-x * x)
    out = d * v
    out[:-1] += e * v[1:]
    out[1:] += e * v[:-1]
    ref = derivative(Field(g, v), order=2).values
    assert np.max(np.abs(out[1:-1] - ref[1:-1])) <= 1e-12


def test_link_scatter_is_adjoint_of_link_difference():
    # <scatter_link_div(u), f> = <u, link_difference(f)> and the scattered
    # field sums to zero, which is where discrete conservation comes from
    rng = np.random.default_rng(3)
    g = Grid.line(-1.0, 1.0, 40)
    f = rng.standard_normal(40)
    u = rng.standard_normal(39)
    div = np.zeros(40)
    scatter_link_div(g, u, 0, div)
    assert np.sum(div * f) == pytest.approx(np.sum(u * link_difference(g, f, 0)), rel=1e-12)
    assert abs(np.sum(div)) <= 1e-13


def test_quadrature_weights_sum_to_box_measure():
    g = Grid.line(0.0, 3.0, 31)
    assert np.sum(quadrature_weights(g)) == pytest.approx(3.0, rel=1e-13)
    gp = Grid.line(0.0, 3.0, 30, bc=PERIODIC)
    assert np.sum(quadrature_weights(gp)) == pytest.approx(3.0, rel=1e-13)


def test_link_weights_cover_the_box():
    # per-link weight times link count equals the box measure: a periodic
    # axis has n links (one wraps), a walled axis n - 1
    gp = Grid.line(0.0, 3.0, 30, bc=PERIODIC)
    n_links = link_difference(gp, gp.coords()[0], 0).shape[0]
    assert n_links == 30
    assert n_links * link_weights(gp, 0) == pytest.approx(3.0, rel=1e-13)
    gd = Grid.line(0.0, 3.0, 31)
    n_links = link_difference(gd, gd.coords()[0], 0).shape[0]
    assert n_links == 30
    assert n_links * link_weights(gd, 0) == pytest.approx(3.0, rel=1e-13)


def test_2d_integration_and_axis_derivative():
    # coords() already returns full mesh arrays in 2D
    g = Grid((-5.0, -5.0), (5.0, 5.0), (128, 128))
    X, Y = g.coords()
    P = np.exp(-(X ** 2 + Y ** 2) / 2.0) / (2.0 * np.pi)
    # truncated tail mass outside the box dominates the quadrature error
    assert integrate(Field(g, P)) == pytest.approx(1.0, abs=1e-5)
    lin = Field(g, 2.0 * Y)
    assert np.max(np.abs(derivative(lin, axis=1).values - 2.0)) <= 1e-12


@pytest.mark.parametrize("bad", [
    lambda: Grid((-1.0,), (1.0,), (1,)),
    lambda: Grid((-1.0,), (1.0,), (8, 8)),
    lambda: Grid((1.0,), (-1.0,), (8,)),
    lambda: Grid((-1.0,), (1.0,), (8,), bc="absorbing"),
])
def test_bad_grid_construction(bad):
    with pytest.raises(GridError):
        bad()


def test_field_shape_mismatch_rejected():
    g = Grid.line(-1.0, 1.0, 8)
    with pytest.raises(GridError):
        Field(g, np.zeros(9))


def test_field_rejects_non_finite():
    g = Grid.line(-1.0, 1.0, 8)
    v = np.zeros(8)
    v[3] = np.nan
    with pytest.raises(GridError):
        Field(g, v)
