"""State containers and the density-phase <-> wave function dictionary."""
import numpy as np
import pytest

from conftest import gaussian_density, rest_state
from fisherhydro.fields import (
    HydroState,
    NodeError,
    PhysParams,
    WaveFunction,
    madelung_forward,
    madelung_inverse,
    normalize,
    velocity_field,
)
from fisherhydro.grid import Field, Grid, integrate, quadrature_weights
from fisherhydro.potential import parse_potential


def smooth_state(grid, scale=1.0):
    x = grid.coords()[0]
    P = gaussian_density(grid, sigma=1.0)
    S = Field(grid, scale * (2.5 * x + 0.4 * np.sin(x)))
    return HydroState(P, S)


def test_forward_map_preserves_density():
    g = Grid.line(-6.0, 6.0, 512)
    state = smooth_state(g)
    wf = madelung_forward(state, hbar=1.0)
    assert np.max(np.abs(np.abs(wf.psi.values) ** 2 - state.P.values)) <= 1e-14


def test_forward_map_phase():
    g = Grid.line(-6.0, 6.0, 512)
    state = smooth_state(g)
    hbar = 0.7
    wf = madelung_forward(state, hbar)
    expected = np.sqrt(state.P.values) * np.exp(1j * state.S.values / hbar)
    assert np.max(np.abs(wf.psi.values - expected)) <= 1e-14


@pytest.mark.parametrize("hbar", [1.0, 0.7])
def test_roundtrip_recovers_state_up_to_phase_convention(hbar):
    # box chosen so the Gaussian tails stay above the density floor
    g = Grid.line(-6.0, 6.0, 512)
    x = g.coords()[0]
    P = gaussian_density(g, sigma=1.0)
    # offset pushes the anchor phase outside (-pi, pi], forcing a wrap
    S = Field(g, 2.5 * x + 7.0)
    state = HydroState(P, S)
    back = madelung_inverse(madelung_forward(state, hbar), hbar)

    assert np.max(np.abs(back.P.values - P.values)) <= 1e-14
    shift = back.S.values - S.values
    # recovered phase differs by one global multiple of 2 pi hbar
    assert np.ptp(shift) <= 1e-10
    cycles = shift[0] / (2.0 * np.pi * hbar)
    assert abs(cycles - round(cycles)) <= 1e-10
    assert round(cycles) != 0


def test_inverse_raises_at_a_node():
    # odd grid size puts x = 0 exactly on a node of the odd wave function
    g = Grid.line(-8.0, 8.0, 257)
    x = g.coords()[0]
    psi = x * np.exp(-x * x / 4.0)
    wf = WaveFunction.normalized(Field(g, psi.astype(np.complex128)))
    with pytest.raises(NodeError):
        madelung_inverse(wf, hbar=1.0)


def test_inverse_raises_on_underflowed_tails():
    # exp(-50) tails sit far below the relative floor of 1e-12
    g = Grid.line(-10.0, 10.0, 512)
    state = rest_state(gaussian_density(g, sigma=1.0))
    wf = madelung_forward(state, hbar=1.0)
    with pytest.raises(NodeError, match="below the floor"):
        madelung_inverse(wf, hbar=1.0)


def test_velocity_is_linear_in_phase():
    g = Grid.line(-6.0, 6.0, 256)
    x = g.coords()[0]
    P = gaussian_density(g)
    S1 = Field(g, 0.3 * np.sin(x))
    S2 = Field(g, 0.1 * x * x)
    params = PhysParams()
    v1 = velocity_field(HydroState(P, S1), params).values
    v2 = velocity_field(HydroState(P, S2), params).values
    combo = Field(g, 2.0 * S1.values - 3.0 * S2.values)
    v = velocity_field(HydroState(P, combo), params).values
    assert np.max(np.abs(v - (2.0 * v1 - 3.0 * v2))) <= 1e-12


def test_velocity_scales_inversely_with_mass():
    g = Grid.line(-6.0, 6.0, 256)
    x = g.coords()[0]
    state = HydroState(gaussian_density(g), Field(g, np.sin(x)))
    v1 = velocity_field(state, PhysParams(m=1.0)).values
    v2 = velocity_field(state, PhysParams(m=2.0)).values
    assert np.max(np.abs(v2 - 0.5 * v1)) <= 1e-15


def test_state_rejects_unnormalized_density():
    g = Grid.line(-6.0, 6.0, 128)
    P = gaussian_density(g)
    with pytest.raises(ValueError, match="not normalized"):
        HydroState(Field(g, 2.0 * P.values), Field(g, np.zeros(128)))


def test_state_rejects_nonpositive_floor():
    g = Grid.line(-6.0, 6.0, 128)
    P = gaussian_density(g)
    S = Field(g, np.zeros(128))
    for bad in (0.0, -1.0):
        with pytest.raises(ValueError, match="p_floor must be positive"):
            HydroState(P, S, p_floor=bad)


def test_state_rejects_density_below_floor():
    g = Grid.line(-6.0, 6.0, 128)
    P = gaussian_density(g)
    S = Field(g, np.zeros(128))
    with pytest.raises(ValueError, match="below its floor"):
        HydroState(P, S, p_floor=1e3 * float(P.values.min()))


def test_state_rejects_mismatched_grids():
    g1 = Grid.line(-6.0, 6.0, 128)
    g2 = Grid.line(-6.0, 6.0, 129)
    with pytest.raises(ValueError, match="share a grid"):
        HydroState(gaussian_density(g1), Field(g2, np.zeros(129)))


def test_wave_function_rejects_unnormalized():
    g = Grid.line(-6.0, 6.0, 128)
    psi = np.sqrt(gaussian_density(g).values) * 1.5
    with pytest.raises(ValueError, match="not normalized"):
        WaveFunction(Field(g, psi.astype(np.complex128)))


def test_normalize_unit_mass_and_floor():
    g = Grid.line(-8.0, 8.0, 256)
    x = g.coords()[0]
    raw = Field(g, np.exp(-x * x))  # tails underflow the relative floor
    P = normalize(raw, p_floor_rel=1e-10)
    assert integrate(P) == pytest.approx(1.0, abs=1e-14)
    assert P.values.min() >= 0.9e-10 * P.values.max()


def test_normalize_rejects_bad_input():
    g = Grid.line(-1.0, 1.0, 64)
    with pytest.raises(ValueError, match="non-negative"):
        normalize(Field(g, np.linspace(-1.0, 1.0, 64)))
    with pytest.raises(ValueError, match="integrates to zero"):
        normalize(Field(g, np.zeros(64)))


def test_params_default_coupling_is_quantum():
    assert PhysParams().lam == 0.25
    assert PhysParams(hbar=0.7).lam == pytest.approx(0.1225, rel=1e-15)
    assert PhysParams(lam=0.0).lam == 0.0


def test_params_validation():
    with pytest.raises(ValueError):
        PhysParams(m=0.0)
    with pytest.raises(ValueError):
        PhysParams(hbar=-1.0)
    with pytest.raises(ValueError):
        PhysParams(lam=-0.1)


def test_params_potential_evaluation():
    g = Grid.line(-2.0, 2.0, 65)
    x = g.coords()[0]
    params = PhysParams(potential=parse_potential("0.5*x^2"))
    assert np.max(np.abs(params.potential_values(g) - 0.5 * x * x)) <= 1e-14
    assert np.all(PhysParams().potential_values(g) == 0.0)
