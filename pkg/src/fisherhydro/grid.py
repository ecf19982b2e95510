"""Uniform tensor-product grids, finite-difference derivatives, and quadrature.

Conventions used throughout the package:

* Dirichlet grids include both endpoints, dx = (max - min) / (n - 1),
  trapezoid quadrature.
* Periodic grids store n points with the right endpoint identified with the
  left one, dx = (max - min) / n, rectangle quadrature.
* Derivatives are second-order accurate: central stencils in the interior,
  one-sided second-order stencils at Dirichlet boundaries, wraparound on
  periodic grids.
* Energy-type functionals use the link calculus at the bottom of this
  module: staggered differences on the edges between nodes, with exact
  scatter adjoints.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

DIRICHLET = "dirichlet"
PERIODIC = "periodic"

_MIN_POINTS = 8  # smallest n for which every stencil above fits


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    """Uniform 1D or 2D tensor-product grid."""

    mins: tuple[float, ...]
    maxs: tuple[float, ...]
    ns: tuple[int, ...]
    bc: str = DIRICHLET

    def __post_init__(self):
        if self.bc not in (DIRICHLET, PERIODIC):
            raise GridError(f"unknown boundary condition {self.bc!r}")
        if not (1 <= len(self.ns) <= 2):
            raise GridError("only 1D and 2D grids are supported")
        if not (len(self.mins) == len(self.maxs) == len(self.ns)):
            raise GridError("mins, maxs, ns must have equal length")
        for lo, hi, n in zip(self.mins, self.maxs, self.ns):
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise GridError(f"bad extent [{lo}, {hi}]")
            if n < _MIN_POINTS:
                raise GridError(f"n = {n} is too small for the stencils (need >= {_MIN_POINTS})")

    @classmethod
    def line(cls, xmin: float, xmax: float, n: int, bc: str = DIRICHLET) -> "Grid":
        return cls((float(xmin),), (float(xmax),), (int(n),), bc)

    @classmethod
    def rect(cls, mins, maxs, ns, bc: str = DIRICHLET) -> "Grid":
        return cls(tuple(float(v) for v in mins), tuple(float(v) for v in maxs),
                   tuple(int(v) for v in ns), bc)

    @property
    def dim(self) -> int:
        return len(self.ns)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.ns

    @property
    def npoints(self) -> int:
        return int(np.prod(self.ns))

    @property
    def dxs(self) -> tuple[float, ...]:
        out = []
        for lo, hi, n in zip(self.mins, self.maxs, self.ns):
            out.append((hi - lo) / (n - 1) if self.bc == DIRICHLET else (hi - lo) / n)
        return tuple(out)

    def axis(self, i: int = 0) -> np.ndarray:
        """Coordinate array along axis i."""
        lo, hi, n = self.mins[i], self.maxs[i], self.ns[i]
        if self.bc == DIRICHLET:
            return np.linspace(lo, hi, n)
        return lo + np.arange(n) * self.dxs[i]

    def coords(self):
        """Coordinate arrays broadcast to the grid shape (meshgrid for 2D)."""
        axes = [self.axis(i) for i in range(self.dim)]
        if self.dim == 1:
            return (axes[0],)
        return tuple(np.meshgrid(*axes, indexing="ij"))


@dataclass
class Field:
    """Values sampled on a grid. Real fields are float64, complex complex128."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values)
        if np.iscomplexobj(v):
            v = v.astype(np.complex128, copy=False)
        else:
            v = v.astype(np.float64, copy=False)
        if v.shape != self.grid.shape:
            raise GridError(f"values shape {v.shape} does not match grid shape {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise GridError("field contains non-finite values")
        self.values = v

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)

    def with_values(self, values: np.ndarray) -> "Field":
        return Field(self.grid, values)

    @classmethod
    def of(cls, grid: Grid, values) -> "Field":
        return cls(grid, np.asarray(values, dtype=None))

    @classmethod
    def full(cls, grid: Grid, value: float) -> "Field":
        return cls(grid, np.full(grid.shape, float(value)))


# ---------------------------------------------------------------------------
# stencil operators, cached per (n, dx, bc, order)


@lru_cache(maxsize=64)
def _diff_matrix(n: int, dx: float, bc: str, order: int):
    """Sparse derivative matrix plus its transpose (both CSR)."""
    rows, cols, vals = [], [], []

    def put(i, j, v):
        rows.append(i)
        cols.append(j)
        vals.append(v)

    interior = np.arange(1, n - 1)
    if order == 1:
        c = 1.0 / (2.0 * dx)
        rows.extend(np.repeat(interior, 2))
        cols.extend(np.stack([interior - 1, interior + 1], axis=1).ravel())
        vals.extend(np.tile([-c, c], n - 2))
        if bc == PERIODIC:
            put(0, n - 1, -c), put(0, 1, c)
            put(n - 1, n - 2, -c), put(n - 1, 0, c)
        else:
            # one-sided second order at the ends
            put(0, 0, -3 * c), put(0, 1, 4 * c), put(0, 2, -c)
            put(n - 1, n - 1, 3 * c), put(n - 1, n - 2, -4 * c), put(n - 1, n - 3, c)
    elif order == 2:
        c = 1.0 / dx**2
        rows.extend(np.repeat(interior, 3))
        cols.extend(np.stack([interior - 1, interior, interior + 1], axis=1).ravel())
        vals.extend(np.tile([c, -2 * c, c], n - 2))
        if bc == PERIODIC:
            put(0, n - 1, c), put(0, 0, -2 * c), put(0, 1, c)
            put(n - 1, n - 2, c), put(n - 1, n - 1, -2 * c), put(n - 1, 0, c)
        else:
            put(0, 0, 2 * c), put(0, 1, -5 * c), put(0, 2, 4 * c), put(0, 3, -c)
            put(n - 1, n - 1, 2 * c), put(n - 1, n - 2, -5 * c)
            put(n - 1, n - 3, 4 * c), put(n - 1, n - 4, -c)
    else:
        raise GridError(f"derivative order must be 1 or 2, got {order}")
    d = sp.csr_matrix(sp.coo_matrix((vals, (rows, cols)), shape=(n, n)))
    return d, d.T.tocsr()


def _apply_along(matrix, values: np.ndarray, axis: int) -> np.ndarray:
    if values.ndim == 1:
        return matrix @ values
    if axis == 0:
        return matrix @ values
    return (matrix @ values.T).T


def derivative(f: Field, axis: int = 0, order: int = 1) -> Field:
    """Second-order finite-difference derivative along one axis."""
    g = f.grid
    if not (0 <= axis < g.dim):
        raise GridError(f"axis {axis} out of range for {g.dim}D grid")
    d, _ = _diff_matrix(g.ns[axis], g.dxs[axis], g.bc, order)
    return f.with_values(_apply_along(d, f.values, axis))


def derivative_transpose(f: Field, axis: int = 0, order: int = 1) -> Field:
    """Apply the transpose of the derivative matrix (exact discrete adjoint)."""
    g = f.grid
    if not (0 <= axis < g.dim):
        raise GridError(f"axis {axis} out of range for {g.dim}D grid")
    _, dt = _diff_matrix(g.ns[axis], g.dxs[axis], g.bc, order)
    return f.with_values(_apply_along(dt, f.values, axis))


# ---------------------------------------------------------------------------
# link calculus: staggered differences living on the edges between nodes
#
# Energy-type functionals in this package are sums over links, not nodes,
# so that their exact gradients telescope (probability conservation) and
# their small-perturbation dispersion matches the 3-point Laplacian.


def link_difference(grid: Grid, values: np.ndarray, axis: int = 0) -> np.ndarray:
    """Per-link difference of a raw array along one axis.

    Links join consecutive nodes: n of them on a periodic axis (the last
    wraps around), n - 1 on a wall-bounded one.
    """
    if not (0 <= axis < grid.dim):
        raise GridError(f"axis {axis} out of range for {grid.dim}D grid")
    if grid.bc == PERIODIC:
        d = np.roll(values, -1, axis=axis)
        d -= values
        return d
    lo = tuple(slice(None, -1) if a == axis else slice(None) for a in range(values.ndim))
    hi = tuple(slice(1, None) if a == axis else slice(None) for a in range(values.ndim))
    return values[hi] - values[lo]


def link_differences(grid: Grid, values: np.ndarray, axis: int = 0):
    """Per-link difference and midpoint average along one axis."""
    if not (0 <= axis < grid.dim):
        raise GridError(f"axis {axis} out of range for {grid.dim}D grid")
    if grid.bc == PERIODIC:
        nxt = np.roll(values, -1, axis=axis)
        diff = nxt - values
        nxt += values
        nxt *= 0.5
        return diff, nxt
    lo = tuple(slice(None, -1) if a == axis else slice(None) for a in range(values.ndim))
    hi = tuple(slice(1, None) if a == axis else slice(None) for a in range(values.ndim))
    return values[hi] - values[lo], 0.5 * (values[hi] + values[lo])


def link_weights(grid: Grid, axis: int = 0):
    """Quadrature weight of each link of one axis: its own length times the
    nodal weights of the transverse axes.  Scalar in 1D, broadcastable array
    in 2D."""
    if not (0 <= axis < grid.dim):
        raise GridError(f"axis {axis} out of range for {grid.dim}D grid")
    dx = grid.dxs[axis]
    if grid.dim == 1:
        return dx
    wt = axis_weights(grid, 1 - axis)
    return dx * (wt[np.newaxis, :] if axis == 0 else wt[:, np.newaxis])


def scatter_link_div(grid: Grid, u: np.ndarray, axis: int, out: np.ndarray) -> None:
    """out_i += u(left link of i) - u(right link of i).

    Adjoint of the link difference; sums to zero exactly, which is where the
    discrete conservation laws come from.
    """
    if grid.bc == PERIODIC:
        t = np.roll(u, 1, axis=axis)
        t -= u
        out += t
        return
    lo = tuple(slice(None, -1) if a == axis else slice(None) for a in range(out.ndim))
    hi = tuple(slice(1, None) if a == axis else slice(None) for a in range(out.ndim))
    out[hi] += u
    out[lo] -= u


def scatter_link_sum(grid: Grid, u: np.ndarray, axis: int, out: np.ndarray) -> None:
    """out_i += u(left link of i) + u(right link of i): adjoint of the
    midpoint average, up to the factor 1/2."""
    if grid.bc == PERIODIC:
        t = np.roll(u, 1, axis=axis)
        t += u
        out += t
        return
    lo = tuple(slice(None, -1) if a == axis else slice(None) for a in range(out.ndim))
    hi = tuple(slice(1, None) if a == axis else slice(None) for a in range(out.ndim))
    out[hi] += u
    out[lo] += u


def axis_weights(grid: Grid, axis: int) -> np.ndarray:
    """1D quadrature weights along one axis (trapezoid or rectangle)."""
    n, dx = grid.ns[axis], grid.dxs[axis]
    w = np.full(n, dx)
    if grid.bc == DIRICHLET:
        w[0] = w[-1] = dx / 2.0
    return w


def quadrature_weights(grid: Grid) -> np.ndarray:
    """Full weight array with the grid's shape (tensor product of axis weights)."""
    w = axis_weights(grid, 0)
    if grid.dim == 1:
        return w
    return np.outer(w, axis_weights(grid, 1))


def integrate(f: Field) -> float | complex:
    """Quadrature of a field over the whole grid."""
    total = np.sum(f.values * quadrature_weights(f.grid))
    return complex(total) if f.is_complex else float(total)


def laplacian_tridiagonal(grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal and off-diagonal of the standard Dirichlet 3-point Laplacian.

    This is the self-adjoint form with the function pinned to zero just outside
    the grid, used by the wave-equation propagator and the eigensolve oracle.
    It intentionally differs from derivative(order=2) in the boundary rows.
    """
    if grid.dim != 1:
        raise GridError("tridiagonal Laplacian is 1D only")
    if grid.bc != DIRICHLET:
        raise GridError("tridiagonal Laplacian requires a Dirichlet grid")
    n = grid.ns[0]
    dx2 = grid.dxs[0] ** 2
    return np.full(n, -2.0 / dx2), np.full(n - 1, 1.0 / dx2)
