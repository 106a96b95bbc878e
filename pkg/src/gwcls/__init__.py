"""Simulation and conditional least squares inference for 2-type doubly
symmetric critical Galton-Watson processes with immigration."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .model import (
    FiniteLaw2D,
    ModelSpec,
    Regime,
    build_model,
    classify_regime,
    law_cov,
    law_mean,
    model_equal_pair,
    model_equal_pair_null_immigration,
    model_general,
    model_unit_total,
    uniform_unit_square,
)
from .simulate import RngStream, Trajectory, empirical_mean_state, simulate, step
from .cls import (
    ClsResult,
    estimate,
    estimate_alpha_beta,
    estimate_delta,
    estimate_rho,
    estimate_via_normal_equations,
    in_Hn,
    in_tHn,
    objective_Q,
)
from .limits import (
    DiffusionPath,
    joint_limit_sample,
    limit_ab_degenerate_sigma2,
    limit_ab_sample,
    limit_rho_degenerate_sigma2,
    limit_rho_sample,
    sample_limits,
    simulate_Y,
)
from .moments import (
    conditional_cov_oracle,
    conditional_third_oracle,
    expected_state,
    mean_matrix_power,
    moment_growth,
)
from .harness import (
    ExperimentConfig,
    existence_frequencies,
    joint_statistics,
    ks_two_sample,
    run_experiment,
    scaled_errors,
)
