"""Hamiltonian field dynamics for the density-phase pair and the matched
linear wave evolution.

The energy functional is discretized on grid links and differentiated
exactly.  Per axis, with dP and dS the differences across each link of
length dx and Pm the two-point average of P on that link:

    H = sum_links dx [ Pm (dS/dx)^2 / 2m + (lam/2m) (dP/dx)^2 / Pm ]
        + sum_i w_i V_i P_i

The functional derivatives below are the exact gradients of that sum, so
Hamilton's equations hold structurally and total probability is conserved
to round-off by the telescoping of the link divergence.  The link form is
chosen to match the three-point Laplacian the wave propagator uses: both
give small perturbations the dispersion (2 - 2 cos k dx)/dx^2, which is
what lets the two evolutions agree to discretization accuracy instead of
drifting apart at O(dx^2) with different constants.  It also keeps
|dP|/Pm below 2 no matter how steep the density, which spares deep tails
the 1/P^2 blowups a pointwise quotient would produce.  At lam = (hbar/2)^2
the flow is the hydrodynamical form of the linear wave equation; at
lam = 0, or in CLASSICAL mode, it is a classical ensemble.

Evolution never renormalizes or clamps: norm and energy drift are recorded
per sample as the integrator's error metric, and a density crossing the
state's floor aborts the run rather than being regularized.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import solve_banded
from scipy.sparse import csc_matrix, diags, identity
from scipy.sparse.linalg import splu

from .fields import HydroState, PhysParams, WaveFunction
from .grid import (DIRICHLET, PERIODIC, Field, Grid, integrate,
                   laplacian_tridiagonal, link_difference, link_differences,
                   link_weights, quadrature_weights, scatter_link_div,
                   scatter_link_sum)

CLASSICAL = "classical"
QUANTUM = "quantum"


class BlowupError(RuntimeError):
    """Evolution left the trusted region (density collapse or non-finite)."""

    def __init__(self, step: int, reason: str):
        super().__init__(f"aborted at step {step}: {reason}")
        self.step = step


def _effective_params(params: PhysParams, mode: str) -> PhysParams:
    if mode == QUANTUM:
        return params
    if mode == CLASSICAL:
        return replace(params, lam=0.0)
    raise ValueError(f"mode must be {CLASSICAL!r} or {QUANTUM!r}, got {mode!r}")


def _raw_hamiltonian(grid: Grid, P: np.ndarray, S: np.ndarray,
                     params: PhysParams, V: np.ndarray | None = None,
                     w: np.ndarray | None = None) -> float:
    if w is None:
        w = quadrature_weights(grid)
    if V is None:
        V = params.potential_values(grid)
    total = np.sum(w * V * P)
    for ax in range(grid.dim):
        inv2 = 1.0 / grid.dxs[ax] ** 2
        W = link_weights(grid, ax)
        dS, _ = link_differences(grid, S, ax)
        dP, Pm = link_differences(grid, P, ax)
        total += np.sum(W * Pm * dS * dS) * inv2 / (2 * params.m)
        if params.lam != 0.0:
            total += params.lam * np.sum(W * dP * dP / Pm) * inv2 / (2 * params.m)
    return float(total)


def hamiltonian(state: HydroState, params: PhysParams) -> float:
    """Total energy of the density-phase pair under the discrete functional."""
    return _raw_hamiltonian(state.grid, state.P.values, state.S.values, params)


@dataclass(frozen=True)
class FunctionalGradient:
    """Functional derivatives of a scalar functional w.r.t. P and S."""

    dP: Field
    dS: Field


def _energy_gradients(grid: Grid, P: np.ndarray, S: np.ndarray,
                      params: PhysParams, V: np.ndarray | None = None,
                      w: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """(dH/dP, dH/dS) as arrays; the exact gradient of the discrete energy
    divided by the quadrature weights so both read as densities.

    V and w can be passed in precomputed; the integrator calls this four
    times per step, and re-evaluating the potential expression dominates
    otherwise.
    """
    if w is None:
        w = quadrature_weights(grid)
    if V is None:
        V = params.potential_values(grid)
    m, lam = params.m, params.lam

    sum_dS = np.zeros(grid.shape)
    sum_dP = np.zeros(grid.shape)
    for ax in range(grid.dim):
        inv2 = 1.0 / grid.dxs[ax] ** 2
        W = link_weights(grid, ax)
        dS = link_difference(grid, S, ax)
        dP, Pm = link_differences(grid, P, ax)
        F = Pm * dS
        F *= W * (inv2 / m)
        scatter_link_div(grid, F, ax, sum_dS)
        dS *= dS
        dS *= W * (inv2 / (4 * m))
        scatter_link_sum(grid, dS, ax, sum_dP)
        if lam != 0.0:
            dP /= Pm                     # dP now holds the bounded ratio G
            G2 = dP * dP
            G2 *= -W * (lam * inv2 / (4 * m))
            scatter_link_sum(grid, G2, ax, sum_dP)
            dP *= W * (lam * inv2 / m)
            scatter_link_div(grid, dP, ax, sum_dP)
    sum_dP /= w
    sum_dP += V
    sum_dS /= w
    return sum_dP, sum_dS


def functional_derivatives(state: HydroState, params: PhysParams) -> FunctionalGradient:
    grid = state.grid
    dH_dP, dH_dS = _energy_gradients(grid, state.P.values, state.S.values, params)
    return FunctionalGradient(Field(grid, dH_dP), Field(grid, dH_dS))


def hydro_rhs(state: HydroState, params: PhysParams,
              mode: str = QUANTUM) -> tuple[Field, Field]:
    """Canonical flow: dP/dt = +dH/dS, dS/dt = -dH/dP.

    CLASSICAL mode drops the density-gradient term from the energy, which
    removes the pressure-like correction from dS/dt; the continuity part is
    shared verbatim.
    """
    par = _effective_params(params, mode)
    grad = functional_derivatives(state, par)
    return Field(state.grid, grad.dS.values), Field(state.grid, -grad.dP.values)


def quantum_term(state: HydroState, params: PhysParams) -> Field:
    """The lam-dependent piece of -dS/dt: the pressure-like correction that
    separates the hydrodynamical flow from the classical ensemble.  Computed
    as the difference of the two mode gradients so it is consistent with the
    integrator to round-off."""
    full = functional_derivatives(state, params).dP.values
    clas = functional_derivatives(state, _effective_params(params, CLASSICAL)).dP.values
    return Field(state.grid, full - clas)


def stability_dt_max(grid: Grid, params: PhysParams) -> float:
    """Conservative explicit-step bound 0.25 m dx^2 / hbar."""
    return 0.25 * params.m * min(grid.dxs) ** 2 / params.hbar


@dataclass(frozen=True)
class Trajectory:
    """Sampled history of a density-phase evolution, with the conservation
    diagnostics recorded at each stored time."""

    grid: Grid
    times: np.ndarray    # (k,)
    P: np.ndarray        # (k, *grid.shape)
    S: np.ndarray        # (k, *grid.shape)
    norms: np.ndarray    # (k,)  integral of P
    energies: np.ndarray  # (k,) energy functional of the evolving mode

    def __len__(self) -> int:
        return self.times.size

    def state(self, i: int) -> HydroState:
        return HydroState(Field(self.grid, self.P[i]), Field(self.grid, self.S[i]),
                          float(self.P[i].min()))

    @property
    def final(self) -> HydroState:
        return self.state(len(self) - 1)


def evolve_hydro(state: HydroState, params: PhysParams, dt: float, n_steps: int,
                 mode: str = QUANTUM, store_every: int = 1) -> Trajectory:
    """Classical fourth-order Runge-Kutta on the canonical pair.

    Norm and energy are recorded at every stored sample and never corrected:
    their drift is the integrator diagnostic.  The run aborts with
    BlowupError if any value goes non-finite or the density falls below the
    state's floor, where the 1/P singularities make the flow meaningless;
    it does not regularize past either event.
    """
    if dt <= 0 or n_steps < 1 or store_every < 1:
        raise ValueError("dt, n_steps, store_every must be positive")
    par = _effective_params(params, mode)
    grid = state.grid
    if mode == QUANTUM and dt > stability_dt_max(grid, params):
        warnings.warn(f"dt = {dt:.3e} exceeds the heuristic step bound "
                      f"{stability_dt_max(grid, params):.3e}; monitor the "
                      "recorded energy drift", stacklevel=2)
    w = quadrature_weights(grid)
    V = par.potential_values(grid)
    floor = state.p_floor * (1 - 1e-9)
    P = state.P.values.copy()
    S = state.S.values.copy()

    def rhs(Pv, Sv):
        # substages are not normalized states, just points the flow passes
        # through, so this works on raw arrays
        dH_dP, dH_dS = _energy_gradients(grid, Pv, Sv, par, V, w)
        return dH_dS, -dH_dP

    def record(t):
        times.append(t)
        Ps.append(P.copy())
        Ss.append(S.copy())
        norms.append(float(np.sum(w * P)))
        energies.append(_raw_hamiltonian(grid, P, S, par, V, w))

    times, Ps, Ss, norms, energies = [], [], [], [], []
    record(0.0)
    for step in range(1, n_steps + 1):
        k1P, k1S = rhs(P, S)
        k2P, k2S = rhs(P + 0.5 * dt * k1P, S + 0.5 * dt * k1S)
        k3P, k3S = rhs(P + 0.5 * dt * k2P, S + 0.5 * dt * k2S)
        k4P, k4S = rhs(P + dt * k3P, S + dt * k3S)
        P = P + (dt / 6) * (k1P + 2 * k2P + 2 * k3P + k4P)
        S = S + (dt / 6) * (k1S + 2 * k2S + 2 * k3S + k4S)
        if not (np.all(np.isfinite(P)) and np.all(np.isfinite(S))):
            raise BlowupError(step, "non-finite values in the state")
        low = P.min()
        if low < floor:
            raise BlowupError(step, f"density {low:.3e} fell below the floor "
                                    f"{state.p_floor:.3e} (node formation)")
        if step % store_every == 0 or step == n_steps:
            record(step * dt)
    return Trajectory(grid, np.asarray(times), np.asarray(Ps), np.asarray(Ss),
                      np.asarray(norms), np.asarray(energies))


def hamiltonian_tridiagonal(grid: Grid, params: PhysParams) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric tridiagonal (diagonal, off-diagonal) of the wave operator
    -(hbar^2/2m) Lap + V with walls at the grid ends."""
    if grid.dim != 1 or grid.bc != DIRICHLET:
        raise ValueError("tridiagonal form needs a 1D wall-bounded grid")
    lap_d, lap_e = laplacian_tridiagonal(grid)
    V = params.potential_values(grid)
    coef = params.hbar ** 2 / (2 * params.m)
    return -coef * lap_d + V, -coef * lap_e


def _sparse_wave_operator(grid: Grid, params: PhysParams) -> csc_matrix:
    coef = params.hbar ** 2 / (2 * params.m)
    mats = []
    for ax in range(grid.dim):
        n = grid.ns[ax]
        inv = 1.0 / grid.dxs[ax] ** 2
        lap = diags([np.full(n - 1, inv), np.full(n, -2 * inv), np.full(n - 1, inv)],
                    offsets=[-1, 0, 1], format="lil")
        if grid.bc == PERIODIC:
            lap[0, n - 1] = inv
            lap[n - 1, 0] = inv
        mats.append(csc_matrix(lap))
    if grid.dim == 1:
        H = -coef * mats[0]
    else:
        from scipy.sparse import kron
        H = -coef * (kron(mats[0], identity(grid.ns[1]))
                     + kron(identity(grid.ns[0]), mats[1]))
    V = params.potential_values(grid).ravel()
    return csc_matrix(H + diags(V))


@dataclass(frozen=True)
class WaveTrajectory:
    """Sampled history of a linear wave evolution with its diagnostics."""

    grid: Grid
    times: np.ndarray
    psi: np.ndarray       # (k, *grid.shape) complex
    norms: np.ndarray     # (k,)  integral of |psi|^2
    energies: np.ndarray  # (k,)  <psi|H|psi>

    def __len__(self) -> int:
        return self.times.size

    def state(self, i: int) -> WaveFunction:
        return WaveFunction(Field(self.grid, self.psi[i]))

    @property
    def final(self) -> WaveFunction:
        return self.state(len(self) - 1)

    def density(self, i: int) -> Field:
        return Field(self.grid, np.abs(self.psi[i]) ** 2)


def evolve_schrodinger(wf: WaveFunction, params: PhysParams, dt: float, n_steps: int,
                       store_every: int = 1) -> WaveTrajectory:
    """Crank-Nicolson stepping: (1 + i a H)psi' = (1 - i a H)psi, a = dt/2hbar.

    Unconditionally stable and exactly norm-preserving.  1D wall-bounded
    grids go through a banded solve; periodic or 2D grids through a sparse
    LU factored once up front.
    """
    if dt <= 0 or n_steps < 1 or store_every < 1:
        raise ValueError("dt, n_steps, store_every must be positive")
    grid = wf.grid
    alpha = dt / (2 * params.hbar)
    w = quadrature_weights(grid)
    psi = wf.psi.values.copy()

    if grid.dim == 1 and grid.bc == DIRICHLET:
        d, e = hamiltonian_tridiagonal(grid, params)
        Ad = 1.0 + 1j * alpha * d
        Ae = 1j * alpha * e
        Bd = 1.0 - 1j * alpha * d
        Be = -1j * alpha * e
        n = grid.ns[0]
        ab = np.zeros((3, n), dtype=np.complex128)
        ab[0, 1:] = Ae
        ab[1, :] = Ad
        ab[2, :-1] = Ae

        def advance(p):
            rhs = Bd * p
            rhs[:-1] += Be * p[1:]
            rhs[1:] += Be * p[:-1]
            return solve_banded((1, 1), ab, rhs)

        def apply_H(p):
            out = d * p
            out[:-1] += e * p[1:]
            out[1:] += e * p[:-1]
            return out
    else:
        H = _sparse_wave_operator(grid, params)
        n_all = H.shape[0]
        A = (identity(n_all, format="csc") + 1j * alpha * H).tocsc()
        B = (identity(n_all, format="csc") - 1j * alpha * H).tocsc()
        lu = splu(A)

        def advance(p):
            return lu.solve(B @ p.ravel()).reshape(grid.shape)

        def apply_H(p):
            return (H @ p.ravel()).reshape(grid.shape)

    def record(t):
        times.append(t)
        out.append(psi.copy())
        norms.append(float(np.sum(w * np.abs(psi) ** 2)))
        energies.append(float(np.real(np.sum(w * np.conj(psi) * apply_H(psi)))))

    times, out, norms, energies = [], [], [], []
    record(0.0)
    for step in range(1, n_steps + 1):
        psi = advance(psi)
        if step % store_every == 0 or step == n_steps:
            record(step * dt)
    return WaveTrajectory(grid, np.asarray(times), np.asarray(out),
                          np.asarray(norms), np.asarray(energies))


def _lagrangian_samples(traj: Trajectory, params: PhysParams, lam: float) -> np.ndarray:
    """L(t) = int P dS/dt + H[P, S] at the stored sample times, with the
    density-gradient weight set to lam and dS/dt from finite differences
    along the trajectory."""
    if len(traj) < 3:
        raise ValueError("need at least three stored samples")
    grid = traj.grid
    w = quadrature_weights(grid)
    par = replace(params, lam=lam)
    Sdot = np.gradient(traj.S, traj.times, axis=0)
    L = np.empty(len(traj))
    for i in range(len(traj)):
        L[i] = (np.sum(w * traj.P[i] * Sdot[i])
                + _raw_hamiltonian(grid, traj.P[i], traj.S[i], par))
    return L


def classical_lagrangian(traj: Trajectory, params: PhysParams) -> float:
    """Time integral of the ensemble Lagrangian without the density-gradient
    term over the trajectory window.  Evaluated on the lam > 0 flow it equals
    minus lam times the time-integrated translation information of P(t)."""
    L = _lagrangian_samples(traj, params, 0.0)
    return float(np.trapezoid(L, traj.times))


def quantum_lagrangian(traj: Trajectory, params: PhysParams) -> float:
    """Time integral of the full Lagrangian including the density-gradient
    term; vanishes along solutions of the flow it generates."""
    L = _lagrangian_samples(traj, params, params.lam)
    return float(np.trapezoid(L, traj.times))


def poisson_bracket(state: HydroState, gradA: FunctionalGradient,
                    gradB: FunctionalGradient) -> float:
    """{A, B} = int (dA/dP dB/dS - dA/dS dB/dP)."""
    w = quadrature_weights(state.grid)
    return float(np.sum(w * (gradA.dP.values * gradB.dS.values
                             - gradA.dS.values * gradB.dP.values)))


@dataclass(frozen=True)
class Observable:
    """A functional of the state with its value and functional gradients."""

    name: str
    value: callable      # (state, params) -> float
    gradients: callable  # (state, params) -> FunctionalGradient


def _norm_value(state, params):
    return float(integrate(state.P))


def _norm_grad(state, params):
    g = state.grid
    return FunctionalGradient(Field.full(g, 1.0), Field.full(g, 0.0))


def _position_value(state, params):
    x = state.grid.coords()[0]
    return float(integrate(Field(state.grid, x * state.P.values)))


def _position_grad(state, params):
    g = state.grid
    return FunctionalGradient(Field(g, g.coords()[0].copy()), Field.full(g, 0.0))


def _momentum_value(state, params):
    grid = state.grid
    dS, _ = link_differences(grid, state.S.values, 0)
    _, Pm = link_differences(grid, state.P.values, 0)
    W = link_weights(grid, 0)
    return float(np.sum(W * Pm * dS) / grid.dxs[0])


def _momentum_grad(state, params):
    grid = state.grid
    w = quadrature_weights(grid)
    dS, _ = link_differences(grid, state.S.values, 0)
    _, Pm = link_differences(grid, state.P.values, 0)
    W = link_weights(grid, 0)
    inv = 1.0 / grid.dxs[0]
    dA_dP = np.zeros(grid.shape)
    dA_dS = np.zeros(grid.shape)
    scatter_link_sum(grid, W * dS * (0.5 * inv), 0, dA_dP)
    scatter_link_div(grid, W * Pm * inv, 0, dA_dS)
    return FunctionalGradient(Field(grid, dA_dP / w), Field(grid, dA_dS / w))


OBSERVABLES = {
    "hamiltonian": Observable("hamiltonian", lambda s, p: hamiltonian(s, p),
                              lambda s, p: functional_derivatives(s, p)),
    "norm": Observable("norm", _norm_value, _norm_grad),
    "position": Observable("position", _position_value, _position_grad),
    "momentum": Observable("momentum", _momentum_value, _momentum_grad),
}


def bracket_of(name_a: str, name_b: str, state: HydroState, params: PhysParams) -> float:
    """{A, B} for two registered observables."""
    try:
        obs_a, obs_b = OBSERVABLES[name_a], OBSERVABLES[name_b]
    except KeyError as err:
        raise KeyError(f"unregistered observable {err.args[0]!r}; known: "
                       f"{sorted(OBSERVABLES)}") from None
    return poisson_bracket(state, obs_a.gradients(state, params),
                           obs_b.gradients(state, params))
