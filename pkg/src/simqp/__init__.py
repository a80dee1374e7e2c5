"""Linear simultaneous position-momentum measurements on Gaussian states."""

from .phase_space import (
    GaussianState,
    LinearObservable,
    MinUncertaintyParams,
    ModeMismatchError,
    commutator_coeff,
    covariance,
    make_min_uncertainty_state,
    make_probe_state,
    moments,
    momentum,
    position,
    tensor,
)
from .dynamics import (
    InteractionParams,
    PropagatedTransform,
    SolvableGenerator,
    build_generator,
    closed_form_propagator,
    heisenberg_observables,
    numeric_expm,
    propagate,
)
from .measurement import (
    ErrorPair,
    LinearSimultaneousMeasurement,
    ModelFamily,
    TheoremReport,
    arthurs_kelly_errors,
    arthurs_kelly_model,
    branciard_ozawa_residual,
    build_model,
    check_theorem_conditions,
    heisenberg_product,
    lower_bound_l,
    measurement_from_matrix,
    measurement_from_parts,
    noise_operators,
    ozawa_inequality_residual,
    qrms_errors,
    solve_couplings,
)
from .distributions import (
    JointGaussian,
    NonCommutingObservablesError,
    OutcomeRegion,
    PosteriorFamily,
    conditional,
    gauss_error,
    joint_distribution,
    meter_joint,
    p_pair_joint,
    posterior_consistency,
    posterior_state,
    q_pair_joint,
    region_mixture_moments,
    sample,
)

__version__ = "0.1.0"

__all__ = [
    "GaussianState",
    "LinearObservable",
    "MinUncertaintyParams",
    "ModeMismatchError",
    "commutator_coeff",
    "covariance",
    "make_min_uncertainty_state",
    "make_probe_state",
    "moments",
    "momentum",
    "position",
    "tensor",
    "InteractionParams",
    "PropagatedTransform",
    "SolvableGenerator",
    "build_generator",
    "closed_form_propagator",
    "heisenberg_observables",
    "numeric_expm",
    "propagate",
    "ErrorPair",
    "LinearSimultaneousMeasurement",
    "ModelFamily",
    "TheoremReport",
    "arthurs_kelly_errors",
    "arthurs_kelly_model",
    "branciard_ozawa_residual",
    "build_model",
    "check_theorem_conditions",
    "heisenberg_product",
    "lower_bound_l",
    "measurement_from_matrix",
    "measurement_from_parts",
    "noise_operators",
    "ozawa_inequality_residual",
    "qrms_errors",
    "solve_couplings",
    "JointGaussian",
    "NonCommutingObservablesError",
    "OutcomeRegion",
    "PosteriorFamily",
    "conditional",
    "gauss_error",
    "joint_distribution",
    "meter_joint",
    "p_pair_joint",
    "posterior_consistency",
    "posterior_state",
    "q_pair_joint",
    "region_mixture_moments",
    "sample",
]
