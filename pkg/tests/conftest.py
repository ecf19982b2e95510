"""Shared builders for the test suite, plus the acceptance report hook."""

import numpy as np

from fisherhydro import Field, Grid, HydroState, normalize, quadrature_weights

TINY = np.finfo(float).tiny

acceptance_lines = []


def pytest_terminal_summary(terminalreporter):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)


def gaussian_density(grid, center=0.0, sigma=1.0):
    """Unit-mass Gaussian on the grid, tails left unclamped."""
    x = grid.coords()[0]
    P = np.exp(-((x - center) ** 2) / (2.0 * sigma ** 2))
    w = quadrature_weights(grid)
    return Field(grid, P / np.sum(w * P))


def wrapped_gaussian_density(grid, center=0.0, sigma=1.0):
    """Periodic-box Gaussian summed over neighbor images so the seam is
    smooth; on a wide enough box the images only matter in the far tail."""
    x = grid.coords()[0]
    L = grid.maxs[0] - grid.mins[0]
    P = np.zeros_like(x)
    for k in (-1, 0, 1):
        P += np.exp(-((x - center + k * L) ** 2) / (2.0 * sigma ** 2))
    w = quadrature_weights(grid)
    return Field(grid, P / np.sum(w * P))


def rest_state(P, p_floor=TINY):
    """Hydro state with zero phase over the given density."""
    return HydroState(P, Field(P.grid, np.zeros(P.grid.shape)), p_floor=p_floor)
