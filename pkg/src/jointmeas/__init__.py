"""Optimal joint measurements of two incompatible qubit observables.

Synthesis of the two-branch projective scheme, a seeded simulation of the
heralded photon-counting experiment, and estimators for the sharpness
tradeoff.
"""

from .bloch import (
    X_HAT,
    Y_HAT,
    Z_HAT,
    BlochVector,
    DensityMatrix,
    angle_between,
    born_probabilities,
    fidelity,
    to_density_matrix,
)
from .errors import *  # noqa: F401,F403
from .estimator import (
    EstimateResult,
    JointEstimate,
    delta_product,
    estimate_joint,
    expval_from_counts,
    joint_expectations,
    joint_variance,
    sharpness_estimates,
)
from .experiment import ExperimentConfig, ResultRow, build_reference_experiments, emit, run_experiment
from .montecarlo import CountRecord, RngSeed, SharpCountRecord, run_joint, run_sharp, split_runs
from .povm import (
    DichotomicEffectPair,
    FourOutcomeJointPovm,
    JointDesign,
    MarginalPair,
    assemble_joint_povm,
    construct_directions,
    max_theta,
    solve_optimal_sharpness,
    synthesize,
    tradeoff_lhs,
    unsharpness_product,
    validate_effect,
)

__version__ = "0.1.0"
