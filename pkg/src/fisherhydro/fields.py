"""State containers and the Madelung correspondence psi = sqrt(P) exp(i S / hbar).

Densities are kept strictly positive: the normalizing constructors clamp P at
a configurable floor (default 1e-12 times the maximum) and renormalize once.
The inverse map refuses densities with nodes, where the phase is undefined.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Field, Grid, integrate
from .potential import Node as PotentialNode, eval_on_grid

NORM_TOL = 1e-8


class NodeError(ValueError):
    """Raised where a density node makes the phase undefined."""


def normalize(P: Field, p_floor_rel: float = 1e-12) -> Field:
    """Scale to unit integral, clamp at the relative floor, renormalize once."""
    if P.is_complex:
        raise ValueError("densities must be real")
    v = P.values
    if np.any(v < 0):
        raise ValueError("densities must be non-negative before normalization")
    total = integrate(P)
    if total <= 0:
        raise ValueError("density integrates to zero")
    v = v / total
    floor = p_floor_rel * v.max()
    if floor <= 0:
        raise ValueError("density floor must be positive")
    v = np.maximum(v, floor)
    v = v / integrate(Field(P.grid, v))
    return Field(P.grid, v)


@dataclass
class HydroState:
    """Hydrodynamical state: probability density P and phase-action field S."""

    P: Field
    S: Field
    p_floor: float | None = None

    def __post_init__(self):
        if self.P.grid != self.S.grid:
            raise ValueError("P and S must share a grid")
        if self.P.is_complex or self.S.is_complex:
            raise ValueError("P and S must be real fields")
        if self.p_floor is None:
            self.p_floor = 1e-12 * float(self.P.values.max())
        if self.p_floor <= 0:
            raise ValueError("p_floor must be positive")
        if self.P.values.min() < self.p_floor * (1 - 1e-9):
            raise ValueError("density falls below its floor")
        total = integrate(self.P)
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"density not normalized: integral = {total!r}")

    @classmethod
    def normalized(cls, P: Field, S: Field, p_floor_rel: float = 1e-12) -> "HydroState":
        """Normalize and clamp P, then store the clamp level as the floor.

        The floor is the admissibility boundary the evolution guards against,
        not the current minimum: a packet may legitimately vacate a region
        and push its minimum well below the starting minimum, but it may
        never cross the clamp level, where 1/P and 1/P^2 turn singular."""
        Pn = normalize(P, p_floor_rel)
        return cls(Pn, S, p_floor_rel * float(Pn.values.max()))

    @property
    def grid(self) -> Grid:
        return self.P.grid


@dataclass
class WaveFunction:
    """Complex wave function on a grid, normalized to unit probability."""

    psi: Field

    def __post_init__(self):
        if not self.psi.is_complex:
            self.psi = Field(self.psi.grid, self.psi.values.astype(np.complex128))
        total = integrate(Field(self.psi.grid, np.abs(self.psi.values) ** 2))
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"wave function not normalized: |psi|^2 integral = {total!r}")

    @classmethod
    def normalized(cls, psi: Field) -> "WaveFunction":
        dens = np.abs(np.asarray(psi.values)) ** 2
        total = integrate(Field(psi.grid, dens))
        if total <= 0:
            raise ValueError("wave function has zero norm")
        return cls(Field(psi.grid, np.asarray(psi.values) / np.sqrt(total)))

    @property
    def grid(self) -> Grid:
        return self.psi.grid

    def density(self) -> Field:
        return Field(self.psi.grid, np.abs(self.psi.values) ** 2)


@dataclass
class PhysParams:
    """Mass, hbar, the Fisher coupling lambda, and an optional potential.

    lam defaults to (hbar/2)^2, the value at which the hydrodynamical system
    is equivalent to the linear wave equation.  Setting lam = 0 gives the
    classical ensemble.
    """

    m: float = 1.0
    hbar: float = 1.0
    lam: float | None = None
    potential: PotentialNode | None = None

    def __post_init__(self):
        if self.m <= 0 or self.hbar <= 0:
            raise ValueError("m and hbar must be positive")
        if self.lam is None:
            self.lam = (self.hbar / 2.0) ** 2
        if self.lam < 0:
            raise ValueError("lam must be non-negative")

    def potential_values(self, grid: Grid) -> np.ndarray:
        if self.potential is None:
            return np.zeros(grid.shape)
        return eval_on_grid(self.potential, grid)


def madelung_forward(state: HydroState, hbar: float) -> WaveFunction:
    """psi = sqrt(P) exp(i S / hbar), pointwise."""
    psi = np.sqrt(state.P.values) * np.exp(1j * state.S.values / hbar)
    return WaveFunction(Field(state.grid, psi))


def _unwrap_line(phi: np.ndarray, anchor: int) -> np.ndarray:
    """Unwrap a 1D phase array marching outward from the anchor index."""
    out = np.empty_like(phi)
    out[anchor:] = np.unwrap(phi[anchor:])
    out[: anchor + 1] = np.unwrap(phi[anchor::-1])[::-1]
    return out


def madelung_inverse(wf: WaveFunction, hbar: float, anchor=None,
                     p_floor_rel: float = 1e-12) -> HydroState:
    """Recover (P, S) from psi with a continuously unwrapped phase.

    The phase is anchored at the given index (grid center by default) where it
    lies in (-pi*hbar, pi*hbar], and unwrapped by marching away from the
    anchor so adjacent jumps stay below pi*hbar.  Raises NodeError wherever
    |psi|^2 falls below the relative floor: at a node the phase is undefined
    and the continuous S it would take to represent the state does not exist.
    """
    psi = wf.psi.values
    dens = np.abs(psi) ** 2
    # slack admits states sitting exactly at a clamp floor; a genuine node
    # lands orders of magnitude further down
    floor = p_floor_rel * dens.max() * (1.0 - 1e-6)
    if dens.min() < floor:
        idx = np.unravel_index(int(np.argmin(dens)), dens.shape)
        raise NodeError(
            f"|psi|^2 = {dens.min():.3e} at grid index {idx} is below the floor "
            f"{floor:.3e}; phase undefined near a node")
    grid = wf.grid
    if anchor is None:
        anchor = tuple(n // 2 for n in grid.shape)
    elif np.isscalar(anchor):
        anchor = (int(anchor),)
    phi = np.angle(psi)
    if grid.dim == 1:
        unwrapped = _unwrap_line(phi, anchor[0])
    else:
        a0, a1 = anchor
        # raster path: along the anchor row first, then along each column
        row = _unwrap_line(phi[a0, :], a1)
        unwrapped = np.empty_like(phi)
        unwrapped[a0:, :] = np.unwrap(phi[a0:, :], axis=0)
        unwrapped[: a0 + 1, :] = np.unwrap(phi[a0::-1, :], axis=0)[::-1, :]
        unwrapped += row[None, :] - unwrapped[a0, :][None, :]
    S = hbar * unwrapped
    P = Field(grid, dens)
    return HydroState(P, Field(grid, S), floor)


def velocity_field(state: HydroState, params: PhysParams):
    """Flow velocity u = grad(S)/m; a Field in 1D, a tuple of Fields in 2D."""
    from .grid import derivative

    fields = tuple(
        Field(state.grid, derivative(state.S, axis=ax).values / params.m)
        for ax in range(state.grid.dim))
    return fields[0] if state.grid.dim == 1 else fields
