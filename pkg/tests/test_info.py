"""Cross-entropy, translation information, and the quadratic expansion."""
import warnings

import numpy as np
import pytest
from scipy.ndimage import gaussian_filter1d

from conftest import gaussian_density
from fisherhydro.grid import Field, Grid, PERIODIC, derivative, integrate, quadrature_weights
from fisherhydro.info import (
    cross_entropy,
    fisher_information,
    fisher_matrix,
    verify_quadratic_expansion,
)
from fisherhydro.kahler import fisher_metric_density


def test_cross_entropy_is_a_divergence():
    g = Grid.line(-8.0, 8.0, 512)
    P = gaussian_density(g, sigma=1.0)
    Q = gaussian_density(g, sigma=1.2)
    assert cross_entropy(P, P) == 0.0
    assert cross_entropy(Q, P) > 0.0
    assert cross_entropy(P, Q) > 0.0
    # not symmetric
    assert cross_entropy(Q, P) != pytest.approx(cross_entropy(P, Q), rel=1e-3)


def test_cross_entropy_validation():
    g = Grid.line(-1.0, 1.0, 64)
    ones = Field(g, np.full(64, 0.5))
    with pytest.raises(ValueError, match="share a grid"):
        cross_entropy(ones, Field(Grid.line(-1.0, 1.0, 65), np.full(65, 0.5)))
    with pytest.raises(ValueError, match="non-negative"):
        cross_entropy(Field(g, np.linspace(-1, 1, 64)), ones)
    with pytest.raises(ValueError, match="strictly positive"):
        cross_entropy(ones, Field(g, np.zeros(64)))


def test_gaussian_information_value():
    g = Grid.line(-8.0, 8.0, 1024)
    P = gaussian_density(g, sigma=1.0)
    assert fisher_information(P) == pytest.approx(0.5, abs=1e-4)


def test_information_scalings():
    g = Grid.line(-8.0, 8.0, 1024)
    P = gaussian_density(g, sigma=1.0)
    base = fisher_information(P)
    # same discrete problem on a dilated box: exact 1/a^2
    ga = Grid.line(-16.0, 16.0, 1024)
    Pa = gaussian_density(ga, sigma=2.0)
    assert fisher_information(Pa) == pytest.approx(base / 4.0, rel=1e-12)
    assert fisher_information(P, m=3.0) == pytest.approx(base / 3.0, rel=1e-12)


def test_matrix_agrees_with_scalar_in_1d():
    g = Grid.line(-8.0, 8.0, 1024)
    P = gaussian_density(g, sigma=1.0)
    m = fisher_matrix(P).matrix
    assert m.shape == (1, 1)
    assert m[0, 0] == pytest.approx(0.5, abs=1e-4)
    # node-derivative and link forms differ only by discretization
    assert m[0, 0] == pytest.approx(fisher_information(P), abs=1e-4)


def test_translation_invariance_on_periodic_box():
    g = Grid.line(-10.0, 10.0, 512, bc=PERIODIC)
    P = gaussian_density(g, sigma=1.0)
    rolled = Field(g, np.roll(P.values, 37))
    a = fisher_matrix(P).matrix[0, 0]
    b = fisher_matrix(rolled).matrix[0, 0]
    assert abs(a - b) <= 1e-10


def test_smoothing_strictly_decreases_information():
    g = Grid.line(-10.0, 10.0, 512, bc=PERIODIC)
    P = gaussian_density(g, sigma=1.0)
    w = quadrature_weights(g)
    values = [fisher_information(P)]
    for sigma_cells in (4, 8, 16, 32, 64):
        sm = gaussian_filter1d(P.values, sigma_cells, mode="wrap")
        sm /= np.sum(w * sm)
        values.append(fisher_information(Field(g, sm)))
    assert all(b < a for a, b in zip(values, values[1:]))
    assert values[0] == pytest.approx(0.5, abs=1e-3)
    assert values[-1] < 0.1


def test_quadratic_expansion_exact_for_gaussian():
    g = Grid.line(-8.0, 8.0, 512)
    P = gaussian_density(g, sigma=1.0)
    chk = verify_quadratic_expansion(P, [[0.1]])
    # shifted-Gaussian cross-entropy is exactly quadratic: d^2 / (2 sigma^2)
    assert chk.kl[0] == pytest.approx(0.005, abs=1e-5)
    assert chk.quadratic[0] == pytest.approx(0.005, abs=1e-5)
    assert chk.residual[0] <= 1e-8


def test_quadratic_expansion_cubic_remainder_for_skewed_density():
    g = Grid.line(-10.0, 10.0, 1024)
    x = g.coords()[0]
    raw = 0.7 * np.exp(-x * x / 2.0) + 0.3 * np.exp(-((x - 1.5) ** 2) / (2 * 0.36))
    w = quadrature_weights(g)
    P = Field(g, raw / np.sum(w * raw))
    sizes = [0.2, 0.1, 0.05]
    chk = verify_quadratic_expansion(P, [[d] for d in sizes])
    order = np.polyfit(np.log(sizes), np.log(chk.residual), 1)[0]
    assert order >= 2.7


def test_two_dimensional_correlated_gaussian_matrix():
    rho = 0.6
    g = Grid((-6.0, -6.0), (6.0, 6.0), (128, 128))
    X, Y = g.coords()
    det = 1.0 - rho * rho
    raw = np.exp(-(X * X - 2 * rho * X * Y + Y * Y) / (2.0 * det))
    w = quadrature_weights(g)
    P = Field(g, raw / np.sum(w * raw))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        M = fisher_matrix(P).matrix
    target = 0.5 / det * np.array([[1.0, -rho], [-rho, 1.0]])
    assert np.max(np.abs(M - target)) <= 1e-4
    assert M[0, 1] == M[1, 0]


def test_boundary_decay_warning():
    g = Grid.line(-2.0, 2.0, 128)  # tails chopped at ~0.14 of the peak
    P = gaussian_density(g, sigma=1.0)
    with pytest.warns(UserWarning, match="has not decayed"):
        fisher_matrix(P)


def test_expansion_warns_when_mass_leaves_the_box():
    g = Grid.line(-4.0, 4.0, 256)
    P = gaussian_density(g, sigma=1.0)
    with pytest.warns(UserWarning):
        verify_quadratic_expansion(P, [[1.0]])


def test_metric_density_weights_gradients_into_information():
    g = Grid.line(-8.0, 8.0, 1024)
    P = gaussian_density(g, sigma=1.0)
    md = fisher_metric_density(P)
    assert np.max(np.abs(md.values - 0.5 / P.values)) == 0.0
    dP = derivative(P).values
    quad_form = float(np.sum(quadrature_weights(g) * md.values * dP * dP))
    assert quad_form == pytest.approx(fisher_information(P), abs=1e-4)
