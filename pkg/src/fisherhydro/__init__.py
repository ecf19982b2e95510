"""Numerical laboratory for probability-density hydrodynamics.

The package evolves a probability density P and phase-action field S as a
canonical pair under an energy functional whose density-gradient coupling
lam interpolates between a classical ensemble (lam = 0) and the linear wave
equation (lam = (hbar/2)^2), and provides everything needed to check that
correspondence: a Crank-Nicolson wave propagator to compare against,
information-geometry quantities of the density, the pointwise
metric/symplectic/complex structure triple with its canonical form, and a
variational ground-state solver with the second-variation positivity check.
"""

from .dynamics import (CLASSICAL, OBSERVABLES, QUANTUM, BlowupError,
                       FunctionalGradient, Observable, Trajectory,
                       WaveTrajectory, bracket_of, classical_lagrangian,
                       evolve_hydro, evolve_schrodinger,
                       functional_derivatives, hamiltonian,
                       hamiltonian_tridiagonal, hydro_rhs, poisson_bracket,
                       quantum_lagrangian, quantum_term, stability_dt_max)
from .fields import (HydroState, NodeError, PhysParams, WaveFunction,
                     madelung_forward, madelung_inverse, normalize,
                     velocity_field)
from .grid import (DIRICHLET, PERIODIC, Field, Grid, GridError, derivative,
                   integrate, quadrature_weights)
from .info import (ExpansionCheck, FisherMatrix, cross_entropy,
                   fisher_information, fisher_matrix,
                   verify_quadratic_expansion)
from .kahler import (CanonicalBlocks, KahlerBlocks, KahlerResiduals,
                     canonical_constancy, canonical_deviation,
                     canonical_targets, canonical_transform,
                     check_kahler_conditions, dirac_product,
                     fisher_metric_density, hamiltonian_canonical,
                     kahler_family)
from .potential import (EvalError, ParseError, eval_potential, parse_potential,
                        print_expr)
from .variation import (GroundStateResult, VariationReport,
                        minimize_ground_state, schrodinger_spectrum,
                        second_variation, stationarity_residual)

__version__ = "0.1.0"

__all__ = [
    "BlowupError", "CanonicalBlocks", "CLASSICAL", "DIRICHLET", "EvalError",
    "ExpansionCheck", "Field", "FisherMatrix", "FunctionalGradient", "Grid",
    "GridError", "GroundStateResult", "HydroState", "KahlerBlocks",
    "KahlerResiduals", "NodeError", "Observable", "OBSERVABLES", "ParseError",
    "PERIODIC", "PhysParams", "QUANTUM", "Trajectory", "VariationReport",
    "WaveFunction", "WaveTrajectory", "bracket_of", "canonical_constancy",
    "canonical_deviation", "canonical_targets", "canonical_transform",
    "check_kahler_conditions", "classical_lagrangian", "cross_entropy",
    "derivative", "dirac_product", "eval_potential", "evolve_hydro",
    "evolve_schrodinger", "fisher_information", "fisher_matrix",
    "fisher_metric_density", "functional_derivatives", "hamiltonian",
    "hamiltonian_canonical", "hamiltonian_tridiagonal", "hydro_rhs",
    "integrate", "kahler_family", "madelung_forward", "madelung_inverse",
    "minimize_ground_state", "normalize", "parse_potential", "poisson_bracket",
    "print_expr", "quadrature_weights", "quantum_lagrangian", "quantum_term",
    "schrodinger_spectrum", "second_variation", "stability_dt_max",
    "stationarity_residual", "velocity_field", "verify_quadratic_expansion",
]
