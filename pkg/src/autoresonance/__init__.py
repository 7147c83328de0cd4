"""Autoresonant capture in chirped, parametrically pumped oscillators.

The package integrates the reduced amplitude-phase system and the full
oscillator, builds the power-law autoresonant solutions as truncated series,
classifies their stability and checks Lyapunov inequalities numerically.
"""

from __future__ import annotations

from .asymptotics import AsymptoticSolution, build_series, closed_form_leading, phase_roots
from .errors import (
    AmplitudeSingular,
    AutoresonanceError,
    BranchAbsent,
    DegeneratePumping,
    InvalidParameter,
    ModelError,
    NonPositiveLambda,
    NumericalError,
    PhaseUndefined,
    SingularRecurrence,
    StepUnderflow,
)
from .integrate import IntegratorConfig, Termination, Trajectory, integrate
from .lyapunov import (
    LyapunovDomain,
    LyapunovReport,
    TransformedState,
    check_bounds,
    from_transformed,
    hamiltonian,
    lyapunov_rate,
    to_transformed,
    transformed_field,
    transformed_rhs,
)
from .model import (
    OscillatorParams,
    OscillatorState,
    ReducedParams,
    ReducedState,
    oscillator_rhs,
    phase_mismatch,
    reduce_params,
    reduced_rhs,
)
from .stability import Regime, StabilityVerdict, classify, d0, jacobian, oscillator_regime

__all__ = [
    "AmplitudeSingular",
    "AsymptoticSolution",
    "AutoresonanceError",
    "BranchAbsent",
    "DegeneratePumping",
    "IntegratorConfig",
    "InvalidParameter",
    "LyapunovDomain",
    "LyapunovReport",
    "ModelError",
    "NonPositiveLambda",
    "NumericalError",
    "OscillatorParams",
    "OscillatorState",
    "PhaseUndefined",
    "ReducedParams",
    "ReducedState",
    "Regime",
    "SingularRecurrence",
    "StabilityVerdict",
    "StepUnderflow",
    "Termination",
    "Trajectory",
    "TransformedState",
    "build_series",
    "check_bounds",
    "classify",
    "closed_form_leading",
    "d0",
    "from_transformed",
    "hamiltonian",
    "integrate",
    "jacobian",
    "lyapunov_rate",
    "oscillator_regime",
    "oscillator_rhs",
    "phase_mismatch",
    "phase_roots",
    "reduce_params",
    "reduced_rhs",
    "to_transformed",
    "transformed_field",
    "transformed_rhs",
]
