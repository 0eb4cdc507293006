"""branchlab: analytic and Monte Carlo laboratory for a typed branching diffusion.

Particles diffuse in space at a type-controlled rate, their types follow
a mean-reverting Ornstein-Uhlenbeck motion, and binary splits arrive at a
quadratic-in-type rate.  The package evaluates every closed-form growth
rate, wave speed, optimal path and martingale quantity of the model,
simulates the particle system under the original and the spine-changed
measures, and ships a verification harness that checks the analytic
claims against simulation at desk scale.
"""

from .params import ModelParams, validate_params
from .analytics import (
    GrowthRate,
    GrowthRateResult,
    SpectralQuantities,
    delta_gamma,
    delta_gamma_kappa,
    growth_rate_D,
    legendre_pair,
    martingale_decay_rate,
    optimal_split,
    spectral,
    theta_cost,
    wave_speed,
)
from .mc import EstimatorResult
from .simulator import PopulationSnapshot, SimConfig, run

__version__ = "0.1.0"

__all__ = [
    "ModelParams",
    "validate_params",
    "GrowthRate",
    "GrowthRateResult",
    "SpectralQuantities",
    "delta_gamma",
    "delta_gamma_kappa",
    "growth_rate_D",
    "legendre_pair",
    "martingale_decay_rate",
    "optimal_split",
    "spectral",
    "theta_cost",
    "wave_speed",
    "EstimatorResult",
    "PopulationSnapshot",
    "SimConfig",
    "run",
    "__version__",
]
