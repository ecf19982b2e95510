"""Pointwise geometry of the density-phase plane.

At each grid point the pair (P, S) carries a symplectic form, a one-parameter
family of metrics, and a matching complex structure; together they satisfy
the three compatibility conditions of a Kahler triple.  Changing variables
to the wavefunction and its conjugate flattens the whole family: the blocks
become the same constant matrices at every point, which is the coordinate
form of the statement that this geometry is flat.  The overlap product built
from the flattened blocks is the usual Hermitian inner product.

All operations are pointwise and vectorized; blocks are stored as arrays of
shape grid.shape + (2, 2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import HydroState, PhysParams, WaveFunction
from .grid import Field, Grid, link_differences, link_weights, quadrature_weights

OMEGA_BLOCK = np.array([[0.0, 1.0], [-1.0, 0.0]])


def fisher_metric_density(P: Field) -> Field:
    """Pointwise metric weight 1/(2P) on density perturbations.

    The quadratic form int (1/2P) dP dP' reproduces the translation-family
    information matrix when dP runs over shift directions.
    """
    if P.is_complex:
        raise ValueError("density must be real")
    if P.values.min() <= 0:
        raise ValueError("density must be strictly positive")
    return Field(P.grid, 0.5 / P.values)


@dataclass(frozen=True)
class KahlerBlocks:
    """Per-point symplectic form, metric, and complex structure.

    Omega, gA, JA have shape grid.shape + (2, 2); A and gP have the grid's
    shape.  The first slot of each block is the density direction, the
    second the phase direction.
    """

    grid: Grid
    Omega: np.ndarray
    gA: np.ndarray
    JA: np.ndarray
    A: np.ndarray
    gP: np.ndarray


def kahler_family(P: Field, A, hbar: float = 1.0) -> KahlerBlocks:
    """Metric and complex structure for one value of the free function A.

    With a = hbar/(2P):

        gA = [[a, A], [A, (1 + A^2)/a]]
        JA = [[A, (1 + A^2)/a], [-a, -A]]

    Any real A gives a valid triple (det gA = 1 identically); A = 0 is the
    member the canonical transform flattens.
    """
    if hbar <= 0:
        raise ValueError("hbar must be positive")
    gP = fisher_metric_density(P).values
    grid = P.grid
    if isinstance(A, Field):
        if A.grid != grid:
            raise ValueError("A must live on the density's grid")
        Av = A.values
    else:
        Av = np.full(grid.shape, float(A))
    if not np.all(np.isfinite(Av)):
        raise ValueError("A must be finite")
    a = hbar * gP
    shape = grid.shape + (2, 2)
    gA = np.empty(shape)
    gA[..., 0, 0] = a
    gA[..., 0, 1] = Av
    gA[..., 1, 0] = Av
    gA[..., 1, 1] = (1.0 + Av * Av) / a
    JA = np.empty(shape)
    JA[..., 0, 0] = Av
    JA[..., 0, 1] = (1.0 + Av * Av) / a
    JA[..., 1, 0] = -a
    JA[..., 1, 1] = -Av
    Omega = np.broadcast_to(OMEGA_BLOCK, shape).copy()
    return KahlerBlocks(grid, Omega, gA, JA, Av, gP)


@dataclass(frozen=True)
class KahlerResiduals:
    """Worst-case violations of the three compatibility conditions."""

    r1: float  # symplectic-metric compatibility  Omega = g J
    r2: float  # Hermiticity of the metric        J^T g J = g
    r3: float  # complex structure squares to -1  J J = -1

    def max(self) -> float:
        return max(self.r1, self.r2, self.r3)


def check_kahler_conditions(blocks: KahlerBlocks) -> KahlerResiduals:
    """Entrywise max-norm residuals of the three conditions over the grid."""
    JT = np.swapaxes(blocks.JA, -1, -2)
    eye = np.broadcast_to(np.eye(2), blocks.JA.shape)
    r1 = np.abs(blocks.Omega - blocks.gA @ blocks.JA).max()
    r2 = np.abs(JT @ blocks.gA @ blocks.JA - blocks.gA).max()
    r3 = np.abs(blocks.JA @ blocks.JA + eye).max()
    return KahlerResiduals(float(r1), float(r2), float(r3))


@dataclass(frozen=True)
class CanonicalBlocks:
    """The same triple expressed in wavefunction coordinates (complex)."""

    grid: Grid
    Omega: np.ndarray
    g: np.ndarray
    J: np.ndarray
    hbar: float


def canonical_targets(hbar: float):
    """The constant blocks the transform should produce everywhere."""
    Omega = np.array([[0.0, 1j * hbar], [-1j * hbar, 0.0]])
    g = np.array([[0.0, hbar], [hbar, 0.0]])
    J = np.array([[-1j, 0.0], [0.0, 1j]])
    return Omega, g, J


def canonical_transform(blocks: KahlerBlocks, state: HydroState,
                        hbar: float = 1.0) -> CanonicalBlocks:
    """Push the A = 0 triple to wavefunction coordinates point by point.

    The Jacobian of (P, S) -> (psi, psi*) is

        T = [[psi/2P, i psi/hbar], [psi*/2P, -i psi*/hbar]]

    The two bilinear forms transform by the inverse-Jacobian congruence,
    the mixed tensor J by similarity.  For the family member A = 0 the
    result is the same constant matrix at every point regardless of the
    state, which is what makes these coordinates canonical.
    """
    if np.abs(blocks.A).max() != 0.0:
        raise ValueError("canonical transform applies to the A = 0 member")
    if state.grid != blocks.grid:
        raise ValueError("state must live on the blocks' grid")
    P = state.P.values
    psi = np.sqrt(P) * np.exp(1j * state.S.values / hbar)
    shape = blocks.grid.shape + (2, 2)
    T = np.empty(shape, dtype=np.complex128)
    T[..., 0, 0] = psi / (2.0 * P)
    T[..., 0, 1] = 1j * psi / hbar
    T[..., 1, 0] = np.conj(T[..., 0, 0])
    T[..., 1, 1] = np.conj(T[..., 0, 1])
    det = T[..., 0, 0] * T[..., 1, 1] - T[..., 0, 1] * T[..., 1, 0]
    Tinv = np.empty_like(T)
    Tinv[..., 0, 0] = T[..., 1, 1] / det
    Tinv[..., 0, 1] = -T[..., 0, 1] / det
    Tinv[..., 1, 0] = -T[..., 1, 0] / det
    Tinv[..., 1, 1] = T[..., 0, 0] / det
    TinvT = np.swapaxes(Tinv, -1, -2)
    Omega_c = TinvT @ blocks.Omega @ Tinv
    g_c = TinvT @ blocks.gA @ Tinv
    J_c = T @ blocks.JA @ Tinv
    return CanonicalBlocks(blocks.grid, Omega_c, g_c, J_c, hbar)


def canonical_deviation(cb: CanonicalBlocks) -> float:
    """Max entrywise distance of the transformed blocks from the constants."""
    Omega_t, g_t, J_t = canonical_targets(cb.hbar)
    return float(max(np.abs(cb.Omega - Omega_t).max(),
                     np.abs(cb.g - g_t).max(),
                     np.abs(cb.J - J_t).max()))


def canonical_constancy(cb: CanonicalBlocks) -> float:
    """Max spread of each block across the grid: the flatness witness."""
    out = 0.0
    for block in (cb.Omega, cb.g, cb.J):
        flat = block.reshape(-1, 2, 2)
        out = max(out, float(np.abs(flat - flat[0]).max()))
    return out


def _reference_canonical(grid: Grid, hbar: float) -> CanonicalBlocks:
    """Canonical blocks obtained by actually transforming a uniform state."""
    w = quadrature_weights(grid)
    P = np.full(grid.shape, 1.0)
    P /= np.sum(w * P)
    state = HydroState(Field(grid, P), Field.full(grid, 0.0))
    return canonical_transform(kahler_family(Field(grid, P), 0.0, hbar),
                               state, hbar)


def dirac_product(phi: WaveFunction, chi: WaveFunction, hbar: float = 1.0) -> complex:
    """Overlap (1/2hbar) int (phi, phi*) [g' + i Omega'] (chi, chi*)^T.

    The blocks are taken from a real canonical transform rather than written
    in by hand, so the identity with the plain integral int phi* chi is a
    check of the geometry, not an assumption.
    """
    if phi.grid != chi.grid:
        raise ValueError("wavefunctions must share a grid")
    cb = _reference_canonical(phi.grid, hbar)
    M = cb.g + 1j * cb.Omega
    u = np.stack([phi.psi.values, np.conj(phi.psi.values)], axis=-1)
    v = np.stack([chi.psi.values, np.conj(chi.psi.values)], axis=-1)
    dens = np.einsum("...a,...ab,...b->...", u, M, v)
    w = quadrature_weights(phi.grid)
    return complex(np.sum(w * dens) / (2.0 * hbar))


def hamiltonian_canonical(psi: WaveFunction, params: PhysParams) -> float:
    """Energy in wavefunction coordinates: int (hbar^2/2m)|Dpsi|^2 + V|psi|^2.

    The gradient is the link difference, so this is the quadratic form of
    the same three-point operator the wave propagator exponentiates; it
    agrees with the density-phase energy of the inverted state up to the
    O(dx^2) gap between the two chain rules.
    """
    grid = psi.grid
    w = quadrature_weights(grid)
    V = params.potential_values(grid)
    vals = psi.psi.values
    total = float(np.sum(w * V * np.abs(vals) ** 2))
    coef = params.hbar ** 2 / (2.0 * params.m)
    for ax in range(grid.dim):
        dpsi, _ = link_differences(grid, vals, ax)
        W = link_weights(grid, ax)
        total += coef * float(np.sum(W * np.abs(dpsi) ** 2)) / grid.dxs[ax] ** 2
    return total
