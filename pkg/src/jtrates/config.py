"""Solver settings shared by the ODE, finite-difference and Monte Carlo engines."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError
from .rng import DEFAULT_BLOCK_SIZE


@dataclass(frozen=True)
class SolverConfig:
    """Numerical settings; defaults reproduce the reference tables.

    fd_coupling
        ``"implicit"`` solves both regimes and the nonlocal jump term in one
        sparse system per step; ``"lagged"`` evaluates the jump term at the
        previous time level and solves two tridiagonal systems.
    fd_check_steps
        ``(dt, dx)`` for the central differences in the residual check.
    """

    ode_step: float = 1e-4
    fd_nx: int = 2000
    fd_nt: int = 2000
    fd_xmax: float | None = None
    fd_coupling: str = "implicit"
    fd_store_levels: int = 201
    fd_check_steps: tuple[float, float] = (1e-4, 1e-3)
    mc_paths: int = 1_000_000
    mc_step: float = 1.0 / 256.0
    mc_block: int = DEFAULT_BLOCK_SIZE
    workers: int = 1
    antithetic: bool = False

    def __post_init__(self):
        if not self.ode_step > 0:
            raise ConfigError("ode_step must be positive", field="ode_step")
        if self.fd_nx < 4 or self.fd_nt < 1:
            raise ConfigError("finite-difference grid needs fd_nx >= 4 and fd_nt >= 1", field="fd_nx")
        if self.fd_xmax is not None and not self.fd_xmax > 0:
            raise ConfigError("fd_xmax must be positive", field="fd_xmax")
        if self.fd_coupling not in ("implicit", "lagged"):
            raise ConfigError("fd_coupling must be 'implicit' or 'lagged'", field="fd_coupling")
        if self.fd_store_levels < 2:
            raise ConfigError("fd_store_levels must be at least 2", field="fd_store_levels")
        if min(self.fd_check_steps) <= 0:
            raise ConfigError("fd_check_steps must be positive", field="fd_check_steps")
        if self.mc_paths < 2:
            raise ConfigError("mc_paths must be at least 2", field="mc_paths")
        if not self.mc_step > 0:
            raise ConfigError("mc_step must be positive", field="mc_step")
        if self.mc_block < 1 or self.workers < 1:
            raise ConfigError("mc_block and workers must be positive", field="mc_block")
