"""Parisian ruin with mixed deterministic and exponential delays.

Analytic evaluation of ruin quantities for spectrally negative Levy risk
processes (Brownian and Cramer-Lundberg-with-exponential-claims models),
an exact Monte Carlo oracle for every functional, and a verification
suite that cross-checks the two.
"""

from .models import (
    BrownianRisk,
    CramerLundbergExp,
    LevyModel,
    cl_roots,
    drift_mean,
    laplace_exponent,
    load_model_config,
    model_from_config,
    model_to_config,
    phi_inverse,
)
from .parisian import (
    RuinQuery,
    F_cal,
    brownian_ruin_closed,
    compute_quantity,
    exit_lt,
    joint_lt_ruin,
    lambda_det,
    lambda_mixed,
    lt_ruin_infinite,
    lt_ruin_two_sided,
    omega,
    excursion_race,
    ruin_prob_classical,
    ruin_prob_det_delay,
    ruin_prob_exp_delay,
    ruin_prob_mixed,
)
from .scale import W, Z, script_W, script_W_laplace
from .transition import (
    TransitionMeasure,
    cl_tilt_integral,
    integrate_tilted,
    kendall_first_passage_cdf,
    psi1_psi2,
    transition_measure,
)

__version__ = "0.1.0"

__all__ = [
    "BrownianRisk",
    "CramerLundbergExp",
    "LevyModel",
    "RuinQuery",
    "TransitionMeasure",
    "W",
    "Z",
    "F_cal",
    "brownian_ruin_closed",
    "cl_roots",
    "cl_tilt_integral",
    "compute_quantity",
    "drift_mean",
    "exit_lt",
    "integrate_tilted",
    "joint_lt_ruin",
    "kendall_first_passage_cdf",
    "lambda_det",
    "lambda_mixed",
    "laplace_exponent",
    "load_model_config",
    "lt_ruin_infinite",
    "lt_ruin_two_sided",
    "model_from_config",
    "model_to_config",
    "omega",
    "phi_inverse",
    "psi1_psi2",
    "excursion_race",
    "ruin_prob_classical",
    "ruin_prob_det_delay",
    "ruin_prob_exp_delay",
    "ruin_prob_mixed",
    "script_W",
    "script_W_laplace",
    "transition_measure",
]
