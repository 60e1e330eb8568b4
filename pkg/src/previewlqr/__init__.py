"""Stochastic LQR control with finite disturbance preview.

Finite- and infinite-horizon preview controllers, the noncausal
full-preview limit, exact average costs and cost-gap bounds, Monte Carlo
simulation, and independent verification oracles.
"""

from .estimators import FiniteHorizonPreviewLQR, NoncausalLQR, PreviewLQR
from .exceptions import (
    AssumptionError,
    ConfigError,
    DimensionError,
    InformationError,
    NumericalError,
    OracleMismatch,
    PreviewLQRError,
)
from .model import (
    CostSchedule,
    CostWeights,
    DisturbanceWindow,
    LtiSystem,
    LtvSystem,
    sample_noise,
    validate_lti,
    validate_ltv,
)
from .preview_fh import fh_control, fh_synthesize, fh_value, fh_value_coeffs
from .preview_ih import (
    cost_gap,
    convergence_constants,
    ih_control,
    ih_optimal_cost,
    ih_synthesize,
    lqr_cost,
    nc_control,
    nc_cost,
    nc_synthesize,
)
from .riccati import fh_riccati, solve_dare, solve_dlyap
from .simulate import monte_carlo_cost, rollout

__version__ = "0.1.0"

__all__ = [
    "AssumptionError", "ConfigError", "CostSchedule", "CostWeights", "DimensionError",
    "DisturbanceWindow", "FiniteHorizonPreviewLQR", "InformationError", "LtiSystem",
    "LtvSystem", "NoncausalLQR", "NumericalError", "OracleMismatch", "PreviewLQR",
    "PreviewLQRError", "convergence_constants", "cost_gap", "fh_control", "fh_riccati",
    "fh_synthesize", "fh_value", "fh_value_coeffs", "ih_control", "ih_optimal_cost",
    "ih_synthesize", "lqr_cost", "monte_carlo_cost", "nc_control", "nc_cost",
    "nc_synthesize", "rollout", "sample_noise", "solve_dare", "solve_dlyap",
    "validate_lti", "validate_ltv",
]
