"""Cross-entropy and the Fisher information of a density under translations.

Conventions carry a factor 1/2 relative to the textbook location-family
matrix: I_jk = (1/2) int (1/P) dP/dx_j dP/dx_k dx, so that the leading term
of the cross-entropy between a shifted copy and the original is the plain
quadratic form I_jk d_j d_k with no extra 1/2.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline, RectBivariateSpline
from scipy.special import rel_entr

from .fields import normalize
from .grid import (Field, derivative, integrate, link_differences,
                   link_weights, quadrature_weights)

BOUNDARY_DECAY_REL = 1e-6


def cross_entropy(Q: Field, P: Field) -> float:
    """int Q ln(Q/P); non-negative, zero only at Q = P."""
    if Q.grid != P.grid:
        raise ValueError("Q and P must share a grid")
    if Q.is_complex or P.is_complex:
        raise ValueError("densities must be real")
    if P.values.min() <= 0:
        raise ValueError("P must be strictly positive")
    if Q.values.min() < 0:
        raise ValueError("Q must be non-negative")
    return integrate(Field(P.grid, rel_entr(Q.values, P.values)))


def _warn_if_edges_alive(P: Field) -> None:
    v = P.values
    top = v.max()
    for ax in range(v.ndim):
        edges = max(np.take(v, 0, axis=ax).max(), np.take(v, -1, axis=ax).max())
        if edges > BOUNDARY_DECAY_REL * top:
            warnings.warn(
                "density has not decayed at the boundary; translation-family "
                "integrals on this box are unreliable", stacklevel=3)
            return


@dataclass(frozen=True)
class FisherMatrix:
    """Symmetric positive matrix of translation sensitivities."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("matrix must be square")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def quadratic_form(self, delta) -> float:
        d = np.asarray(delta, dtype=np.float64)
        return float(d @ self.matrix @ d)


def fisher_matrix(P: Field) -> FisherMatrix:
    """I_jk = (1/2) int (dP/dx_j)(dP/dx_k)/P over the grid."""
    if P.is_complex:
        raise ValueError("density must be real")
    if P.values.min() <= 0:
        raise ValueError("density must be strictly positive")
    _warn_if_edges_alive(P)
    dim = P.grid.dim
    grads = [derivative(P, axis=ax).values for ax in range(dim)]
    w = quadrature_weights(P.grid)
    out = np.empty((dim, dim))
    for j in range(dim):
        for k in range(j, dim):
            out[j, k] = out[k, j] = 0.5 * np.sum(w * grads[j] * grads[k] / P.values)
    return FisherMatrix(out)


def fisher_information(P: Field, m: float = 1.0) -> float:
    """Scalar information rate (1/2m) sum_links dx (dP/dx)^2 / Pm, with Pm
    the midpoint density on the link.  This is literally the density-gradient
    part of the hydrodynamical energy divided by its coupling, so identities
    relating the two hold to round-off rather than to discretization error."""
    if m <= 0:
        raise ValueError("m must be positive")
    if P.is_complex:
        raise ValueError("density must be real")
    if P.values.min() <= 0:
        raise ValueError("density must be strictly positive")
    total = 0.0
    for ax in range(P.grid.dim):
        dP, Pm = link_differences(P.grid, P.values, ax)
        W = link_weights(P.grid, ax)
        total += 0.5 * np.sum(W * dP * dP / Pm) / P.grid.dxs[ax] ** 2
    return total / m


def _shift_density(P: Field, delta: np.ndarray) -> np.ndarray:
    """Evaluate P(x - delta) by cubic spline; outside the box counts as zero."""
    grid = P.grid
    if grid.dim == 1:
        spline = CubicSpline(grid.axis(0), P.values, extrapolate=False)
        vals = spline(grid.axis(0) - delta[0])
        return np.nan_to_num(vals, nan=0.0)
    x0, x1 = grid.axis(0), grid.axis(1)
    spline = RectBivariateSpline(x0, x1, P.values, kx=3, ky=3)
    q0, q1 = x0 - delta[0], x1 - delta[1]
    vals = spline(q0, q1, grid=True)
    inside0 = (q0 >= x0[0]) & (q0 <= x0[-1])
    inside1 = (q1 >= x1[0]) & (q1 <= x1[-1])
    vals[~inside0, :] = 0.0
    vals[:, ~inside1] = 0.0
    return vals


@dataclass(frozen=True)
class ExpansionCheck:
    """Shifted-copy cross-entropies against their quadratic prediction."""

    deltas: np.ndarray      # (k, dim)
    kl: np.ndarray          # (k,)
    quadratic: np.ndarray   # (k,)
    fisher: FisherMatrix

    @property
    def residual(self) -> np.ndarray:
        return np.abs(self.kl - self.quadratic)


def verify_quadratic_expansion(P: Field, deltas, p_floor_rel: float = 1e-12) -> ExpansionCheck:
    """Shift P by each delta, measure cross-entropy against the original, and
    tabulate it next to the Fisher quadratic form.

    The residual decays like |delta|^3 for smooth densities, which is the
    practical check that the matrix really is the curvature of the
    cross-entropy at zero shift.
    """
    ds = np.atleast_2d(np.asarray(deltas, dtype=np.float64))
    if ds.shape[1] != P.grid.dim:
        raise ValueError("each delta needs one component per grid axis")
    info = fisher_matrix(P)
    kl = np.empty(ds.shape[0])
    quad = np.empty(ds.shape[0])
    for i, d in enumerate(ds):
        raw = _shift_density(P, d)
        mass = integrate(Field(P.grid, raw))
        if abs(mass - 1.0) > 1e-6:
            warnings.warn(
                f"shift {tuple(d)} pushes mass {abs(mass - 1.0):.2e} beyond the "
                "box edge; cross-entropy there mixes in a boundary artifact",
                stacklevel=2)
        Q = normalize(Field(P.grid, raw), p_floor_rel)
        kl[i] = cross_entropy(Q, P)
        quad[i] = info.quadratic_form(d)
    return ExpansionCheck(ds, kl, quad, info)
