"""Regime-switching short-rate models driven by the jump-telegraph process."""

from .analytic import bond_price_expectation, forward_rate
from .config import SolverConfig
from .errors import (
    ConfigError,
    DegenerateParametersWarning,
    InvalidArgumentError,
    InvalidStateError,
    JtratesError,
    MgfOverflowError,
    UnsupportedModelError,
)
from .measure import MeasureParams, radon_nikodym, to_risk_neutral
from .models import ModelKind, ModelSpec, expected_future_rate, simulate_ensemble, simulate_rate
from .montecarlo import ConvexityReport, McEstimate, convexity_adjustment, price_bond_mc
from .pde import bond_prices_pde, feynman_kac_residual, price_bond_pde, solve_dothan_fd, solve_merton_ode
from .telegraph import TelegraphParams, martingale_stats, mean_jt, mgf_jt, sample_path

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ConvexityReport",
    "DegenerateParametersWarning",
    "InvalidArgumentError",
    "InvalidStateError",
    "JtratesError",
    "McEstimate",
    "MeasureParams",
    "MgfOverflowError",
    "ModelKind",
    "ModelSpec",
    "SolverConfig",
    "TelegraphParams",
    "UnsupportedModelError",
    "bond_price_expectation",
    "bond_prices_pde",
    "convexity_adjustment",
    "expected_future_rate",
    "feynman_kac_residual",
    "forward_rate",
    "martingale_stats",
    "mean_jt",
    "mgf_jt",
    "price_bond_mc",
    "price_bond_pde",
    "radon_nikodym",
    "sample_path",
    "simulate_ensemble",
    "simulate_rate",
    "solve_dothan_fd",
    "solve_merton_ode",
    "to_risk_neutral",
]
