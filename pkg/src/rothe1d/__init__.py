"""Adaptive complex-Gaussian propagation for the 1D time-dependent
Schrodinger equation, with a spectral Crank-Nicolson grid reference.

The wave function is a linear combination of fully flexible complex
Gaussians.  Each time step discretizes the evolution with the implicit
trapezoidal rule and solves the resulting nonlinear least-squares problem by
variable projection with Gauss-Newton iterations, growing the basis whenever
the per-step tolerance cannot be met.
"""

from .fit import FitResult, LCGFit, LCGState, fit_lcg, ladder_state, synthesize
from .gaussians import (
    DegenerateResidualError,
    Gaussian1D,
    InfeasibleMomentsError,
    MomentSet,
    analytic_moments,
    evaluate,
    gaussian_from_moments,
    moments_of,
    overlap,
    parameter_derivatives,
)
from .grid import (
    DEFAULT_GRID,
    CrankNicolson,
    EigensolverError,
    GridTrajectory,
    GridWavefunction,
    LinearSolveError,
    UniformGrid,
    apply_hamiltonian,
    cn_step,
    ground_state,
    inner,
    propagate_reference,
    spectral_derivative,
)
from .model import (
    DEFAULT_MODEL,
    ModelConfig,
    PulseConfig,
    diagnostics,
    effective_potential,
    field,
    field_extrema,
    potential,
)
from .rothe import (
    RothePropagator,
    RotheResult,
    RotheSettings,
    RotheStepError,
    RotheStepProblem,
    RotheStepReport,
    apply_half_step,
    augment_basis,
    gauss_newton_step,
    objective_and_coeffs,
    rothe_propagate,
    rothe_step,
    transformed_columns,
)

__version__ = "0.1.0"

__all__ = [
    "CrankNicolson",
    "DEFAULT_GRID",
    "DEFAULT_MODEL",
    "DegenerateResidualError",
    "EigensolverError",
    "FitResult",
    "Gaussian1D",
    "GridTrajectory",
    "GridWavefunction",
    "InfeasibleMomentsError",
    "LCGFit",
    "LCGState",
    "LinearSolveError",
    "ModelConfig",
    "MomentSet",
    "PulseConfig",
    "RothePropagator",
    "RotheResult",
    "RotheSettings",
    "RotheStepError",
    "RotheStepProblem",
    "RotheStepReport",
    "UniformGrid",
    "analytic_moments",
    "apply_half_step",
    "apply_hamiltonian",
    "augment_basis",
    "cn_step",
    "diagnostics",
    "effective_potential",
    "evaluate",
    "field",
    "field_extrema",
    "fit_lcg",
    "gauss_newton_step",
    "gaussian_from_moments",
    "ground_state",
    "inner",
    "ladder_state",
    "moments_of",
    "objective_and_coeffs",
    "overlap",
    "parameter_derivatives",
    "potential",
    "propagate_reference",
    "rothe_propagate",
    "rothe_step",
    "spectral_derivative",
    "synthesize",
    "transformed_columns",
]
