"""Ground state by constrained minimization, and the second variation of the
action around it.

Both operations work in the amplitude variable a = sqrt(P) at frozen phase,
where the lam-weighted density-gradient energy is the exact quadratic form
(2 lam / m) sum_links dx (da/dx)^2 of the pinned-end tridiagonal operator.
That buys two things.  The minimizer and the eigensolve oracle share one
matrix, so their energies can be compared at tight relative tolerance while
still taking fully independent solution paths.  And the second-order change
of the energy under P -> P + eps dP has a closed per-link form,

    eps^2 (lam / 2m) sum_links dx sqrt(P_i P_j) (du/dx)^2,   u = dP/P,

which follows from the per-link identity
(D(au))^2 - Da D(au^2) = a_i a_j (Du)^2 and is therefore the exact eps^2
coefficient of the measured difference, manifestly positive, not merely its
continuum limit.  Around a stationary state the first-order term vanishes
for mean-free dP, so measured minus closed form is genuinely O(eps^3).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .fields import HydroState, PhysParams
from .grid import (DIRICHLET, Field, Grid, GridError, integrate,
                   laplacian_tridiagonal, link_difference, link_weights,
                   quadrature_weights)

MEAN_FREE_TOL = 1e-10


def _amplitude_operator(grid: Grid, params: PhysParams):
    """Tridiagonal (diagonal, off-diagonal) of -(2 lam/m) Lap + V.

    At lam = (hbar/2)^2 this is the standard wave operator; for explicit
    lam it is the operator whose quadratic form is the lam-weighted
    amplitude energy.
    """
    lap_d, lap_e = laplacian_tridiagonal(grid)
    coef = 2.0 * params.lam / params.m
    V = params.potential_values(grid)
    return -coef * lap_d + V, -coef * lap_e


def _amplitude_energy(dx: float, coef: float, V: np.ndarray, a: np.ndarray) -> float:
    # positive-term form of the quadratic form dx * a (H a): the pinned-end
    # Laplacian contributes the interior links plus one wall link at each
    # end, and summing squares keeps round-off at eps * E rather than
    # eps * |kinetic diagonal|, which matters at the 1e-12 stop
    da = np.diff(a)
    kinetic = np.sum(da * da) + a[0] * a[0] + a[-1] * a[-1]
    return float(coef * kinetic / dx + dx * np.sum(V * a * a))


def _apply_tridiagonal(d: np.ndarray, e: np.ndarray, a: np.ndarray) -> np.ndarray:
    out = d * a
    out[:-1] += e * a[1:]
    out[1:] += e * a[:-1]
    return out


def schrodinger_spectrum(params: PhysParams, grid: Grid, n_states: int = 1):
    """Lowest eigenpairs of the amplitude operator: the in-repo oracle.

    Returns (energies, amplitudes) with amplitudes normalized to
    dx * sum a^2 = 1, matching the minimizer's constraint.
    """
    if n_states < 1:
        raise ValueError("n_states must be positive")
    d, e = _amplitude_operator(grid, params)
    vals, vecs = eigh_tridiagonal(d, e, select="i",
                                  select_range=(0, n_states - 1))
    dx = grid.dxs[0]
    return vals, (vecs / np.sqrt(dx)).T


@dataclass(frozen=True)
class GroundStateResult:
    """Minimizer output: the density, its energy, and the iteration count."""

    P: Field
    energy: float
    iterations: int
    converged: bool


def minimize_ground_state(params: PhysParams, grid: Grid, init: Field,
                          max_iter: int = 100000,
                          tol: float = 1e-12) -> GroundStateResult:
    """Minimize the frozen-phase energy over normalized densities.

    Projected gradient descent on a = sqrt(P): the functional gradient is
    2 (dH/dP) a, the iterate is renormalized after every step, and a
    backtracking line search halves the step until the energy decreases.
    Terminates when the relative energy change drops below tol; if the
    iteration budget runs out first the best iterate is returned with
    converged=False rather than raising.
    """
    if grid.dim != 1 or grid.bc != DIRICHLET:
        raise GridError("minimizer works on 1D wall-bounded grids")
    if init.grid != grid:
        raise ValueError("init must live on the target grid")
    if init.is_complex or init.values.min() < 0:
        raise ValueError("init must be a real non-negative density")
    dx = grid.dxs[0]
    d, e = _amplitude_operator(grid, params)
    coef = 2.0 * params.lam / params.m
    V = params.potential_values(grid)
    if not np.all(np.isfinite(V)):
        raise ValueError("potential is not finite on the grid")

    a = np.sqrt(init.values)
    a /= np.sqrt(dx * np.sum(a * a))
    E = _amplitude_energy(dx, coef, V, a)
    iterations = 0
    converged = False
    for iterations in range(1, max_iter + 1):
        Ha = _apply_tridiagonal(d, e, a)
        # residual = half the projected functional gradient in a; its
        # component along a vanishes, so descent moves tangentially to the
        # constraint and the renormalization below is a projection
        r = Ha - E * a
        if not np.all(np.isfinite(r)):
            raise RuntimeError("gradient went non-finite")
        rnorm2 = dx * float(np.sum(r * r))
        if rnorm2 == 0.0:
            converged = True
            break
        # trial step from the exact line search: the energy restricted to
        # span{a, r} is a 2x2 Rayleigh problem with matrix [[E, b], [b, c]],
        # whose lower eigenvalue theta is reached at a - step*r with
        # step = (E - theta)/|r|^2; backtracking then accepts immediately
        # except under round-off
        b = np.sqrt(rnorm2)
        rhat = r / b
        c = dx * float(np.sum(rhat * _apply_tridiagonal(d, e, rhat)))
        half_spread = 0.5 * (c - E)
        theta = E + half_spread - np.sqrt(half_spread * half_spread + rnorm2)
        step = (E - theta) / rnorm2
        while True:
            cand = a - step * r
            cand /= np.sqrt(dx * np.sum(cand * cand))
            E_cand = _amplitude_energy(dx, coef, V, cand)
            if E_cand <= E or step < 1e-18:
                break
            step *= 0.5
        if E_cand > E:
            converged = True   # no descent direction left at machine scale
            break
        assert E_cand <= E
        dE = E - E_cand
        a, E = cand, E_cand
        if dE <= tol * max(abs(E), np.finfo(float).tiny):
            converged = True
            break
    return GroundStateResult(Field(grid, a * a), E, iterations, converged)


def stationarity_residual(result: GroundStateResult, params: PhysParams,
                          grid: Grid, p_cut: float = 1e-6) -> float:
    """Max |(H a)/a - E| over points with P > p_cut.

    Zero at an exact eigenvector; measures how far the minimizer's fixed
    point is from satisfying the stationary condition of its own
    functional.
    """
    d, e = _amplitude_operator(grid, params)
    a = np.sqrt(result.P.values)
    mask = result.P.values > p_cut
    Ha = _apply_tridiagonal(d, e, a)
    return float(np.abs(Ha[mask] / a[mask] - result.energy).max())


@dataclass(frozen=True)
class VariationReport:
    """Measured vs closed-form second-order energy change."""

    epsilon: float
    delta_L_measured: float
    delta_L_closed_form: float
    residual: float


def second_variation(state: HydroState, deltaP: Field, epsilon: float,
                     params: PhysParams) -> VariationReport:
    """Change of the frozen-phase action under P -> P + eps dP.

    The measured value is the energy difference over a unit time window
    (the phase-rate term integrates to zero for mean-free dP, so the
    window contributes a factor one); the closed form is the exact eps^2
    coefficient in the module docstring.  Around a stationary state their
    difference is the O(eps^3) remainder.
    """
    grid = state.grid
    if deltaP.grid != grid:
        raise ValueError("deltaP must live on the state's grid")
    if deltaP.is_complex:
        raise ValueError("deltaP must be real")
    total = integrate(deltaP)
    if abs(total) > MEAN_FREE_TOL:
        raise ValueError(f"deltaP is not mean-free: integral = {total:.3e}")
    P = state.P.values
    dP = deltaP.values
    P_new = P + epsilon * dP
    if P_new.min() < state.p_floor:
        raise ValueError("perturbed density falls below the state's floor")

    w = quadrature_weights(grid)
    V = params.potential_values(grid)
    coef = 2.0 * params.lam / params.m
    a_old = np.sqrt(P)
    a_new = np.sqrt(P_new)
    measured = float(np.sum(w * V * (P_new - P)))
    closed = 0.0
    u = dP / P
    for ax in range(grid.dim):
        W = link_weights(grid, ax)
        inv2 = 1.0 / grid.dxs[ax] ** 2
        da_old = link_difference(grid, a_old, ax)
        da_new = link_difference(grid, a_new, ax)
        measured += coef * inv2 * float(np.sum(W * (da_new * da_new
                                                    - da_old * da_old)))
        du = link_difference(grid, u, ax)
        gm = np.sqrt(_pair_product(grid, P, ax))
        closed += 0.5 * params.lam / params.m * inv2 * float(
            np.sum(W * gm * du * du))
    closed *= epsilon ** 2
    return VariationReport(epsilon, measured, closed, abs(measured - closed))


def _pair_product(grid: Grid, values: np.ndarray, axis: int) -> np.ndarray:
    """Product of the two node values across each link of one axis."""
    if grid.bc == DIRICHLET:
        lo = tuple(slice(None, -1) if a == axis else slice(None)
                   for a in range(values.ndim))
        hi = tuple(slice(1, None) if a == axis else slice(None)
                   for a in range(values.ndim))
        return values[lo] * values[hi]
    return values * np.roll(values, -1, axis=axis)
