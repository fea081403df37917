"""Monte Carlo bond prices and convexity adjustments.

The bond price is the risk-neutral expectation of ``exp(-int_0^T r ds)``.
Paths are simulated in blocks keyed by ``(seed, block)`` so estimates are
reproducible and independent of the number of worker threads.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy.integrate import simpson

from .analytic import forward_rate, log_bond_price_expectation
from .config import SolverConfig
from .errors import ConfigError, InvalidArgumentError, InvalidStateError
from .models import ModelSpec, simulate_ensemble
from .pde import solve_dothan_fd, solve_merton_ode
from .rng import DEFAULT_SEED, mean_and_stderr, run_blocks

# half-width of the maturity stencil used to differentiate log-prices
DIFF_STEP = 1e-4
# report grids finer than this are rejected
MIN_GRID_SPACING = 1e-4


@dataclass(frozen=True)
class McEstimate:
    estimate: float
    stderr: float
    n_paths: int
    seed: int
    step: float | None

    def z_score(self, reference: float) -> float:
        """Signed distance to ``reference`` in standard errors."""
        return (self.estimate - reference) / self.stderr if self.stderr > 0 else math.copysign(math.inf, self.estimate - reference)


def _require_q(model: ModelSpec):
    if model.measure != "Q":
        raise InvalidStateError("bond prices are Q-expectations; convert the model with to_risk_neutral")


def _check_regime(i: int):
    if i not in (0, 1):
        raise InvalidArgumentError(f"regime must be 0 or 1, got {i!r}")


def _discount_samples(
    model: ModelSpec, i: int, r0: float, checkpoints: NDArray[np.float64], n_paths: int, cfg: SolverConfig, seed: int
) -> NDArray[np.float64]:
    """``exp(-int_0^c r ds)`` per path at each checkpoint, shape ``(len(checkpoints), n)``.

    Antithetic pairs are averaged, so ``n`` is the number of independent pairs.
    """
    horizon = float(checkpoints.max())

    def block(rng, n):
        ens = simulate_ensemble(
            model, r0, i, horizon, n, rng, step=cfg.mc_step, checkpoints=checkpoints, antithetic=cfg.antithetic
        )
        disc = np.exp(-ens.checkpoint_integral)
        if cfg.antithetic:
            half = n // 2
            disc = 0.5 * (disc[:, :half] + disc[:, half:])
        return disc

    if cfg.antithetic and (n_paths % 2 or cfg.mc_block % 2):
        raise ConfigError("antithetic sampling needs an even path count and block size", field="antithetic")
    parts = run_blocks(block, n_paths, seed, block_size=cfg.mc_block, workers=cfg.workers)
    return np.concatenate(parts, axis=1)


def price_bonds_mc(
    model: ModelSpec,
    i: int,
    r0: float,
    maturities,
    n_paths: int | None = None,
    cfg: SolverConfig | None = None,
    seed: int = DEFAULT_SEED,
) -> list[McEstimate]:
    """Bond prices for several maturities from one set of paths."""
    cfg = cfg or SolverConfig()
    _require_q(model)
    _check_regime(i)
    n_paths = cfg.mc_paths if n_paths is None else n_paths
    if n_paths < 2:
        raise InvalidArgumentError("need at least two paths")
    mats = np.atleast_1d(np.asarray(maturities, dtype=float))
    if np.any(~np.isfinite(mats)) or np.any(mats < 0):
        raise InvalidArgumentError("maturities must be finite and non-negative")
    step = cfg.mc_step if model.kind.diffusive else None
    if not mats.max() > 0:
        return [McEstimate(1.0, 0.0, n_paths, seed, step) for _ in mats]
    disc = _discount_samples(model, i, r0, mats, n_paths, cfg, seed)
    out = []
    for row in disc:
        mean, err = mean_and_stderr(row)
        out.append(McEstimate(mean, err, n_paths, seed, step))
    return out


def price_bond_mc(
    model: ModelSpec,
    i: int,
    r0: float,
    maturity: float,
    n_paths: int | None = None,
    cfg: SolverConfig | None = None,
    seed: int = DEFAULT_SEED,
) -> McEstimate:
    """Mean and standard error of ``exp(-int_0^T r ds)`` over simulated Q-paths.

    Examples
    --------
    >>> from jtrates.tables import TABLES
    >>> est = price_bond_mc(TABLES[1].model, 0, 0.05, 1.0, n_paths=20_000, seed=1)
    >>> abs(est.estimate - 0.954317) < 4 * est.stderr
    True
    """
    return price_bonds_mc(model, i, r0, [maturity], n_paths, cfg, seed)[0]


# --------------------------------------------------------------------------
# convexity adjustment
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ConvexityReport:
    """Implied forward curve against the expectation-hypothesis forward curve.

    ``adjustment = f_impl - f_exp``; ``stderr`` is zero for the PDE method.
    ``log_price_exp``/``log_price_impl`` are the log bond prices at each
    maturity, so the integrated adjustment can be checked against their gap.
    """

    kind: str
    regime: int
    r0: float
    method: str
    maturities: NDArray[np.float64]
    f_exp: NDArray[np.float64]
    f_impl: NDArray[np.float64]
    adjustment: NDArray[np.float64]
    stderr: NDArray[np.float64]
    log_price_exp: NDArray[np.float64]
    log_price_impl: NDArray[np.float64]
    price_stderr: NDArray[np.float64] = field(default=None)

    def integrated_adjustment(self) -> float:
        """Simpson integral of ``a`` over ``[0, T]``, with ``a(0) = 0``."""
        tau = np.concatenate([[0.0], self.maturities])
        a = np.concatenate([[0.0], self.adjustment])
        return float(simpson(a, x=tau))

    def log_price_gap(self) -> float:
        """``log F_exp(T) - log F_impl(T)`` at the last maturity."""
        return float(self.log_price_exp[-1] - self.log_price_impl[-1])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["maturity", "f_exp", "f_impl", "adjustment", "stderr"])
        for row in zip(self.maturities, self.f_exp, self.f_impl, self.adjustment, self.stderr):
            writer.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


def default_maturity_grid(maturity: float, n: int = 41) -> NDArray[np.float64]:
    """Geometric grid of ``n`` points from ``T/40`` to ``T``."""
    return np.geomspace(maturity / 40.0, maturity, n)


def _check_grid(maturities) -> NDArray[np.float64]:
    mats = np.asarray(maturities, dtype=float)
    if mats.ndim != 1 or mats.size < 1 or np.any(~np.isfinite(mats)):
        raise InvalidArgumentError("maturity grid must be a non-empty 1-d array")
    if mats[0] < DIFF_STEP or np.any(np.diff(mats) <= 0):
        raise InvalidArgumentError(f"maturity grid must be strictly increasing and start at or above {DIFF_STEP}")
    if mats.size > 1 and np.diff(mats).min() < MIN_GRID_SPACING:
        raise ConfigError(f"maturity grid spacing below {MIN_GRID_SPACING}", field="maturities")
    return mats


def _pde_log_price(model: ModelSpec, i: int, r0: float, horizon: float, cfg: SolverConfig):
    """Callable ``tau -> log F_i(r0, tau)`` on ``[0, horizon]`` from a single solve."""
    if model.kind.dothan:
        sol = solve_dothan_fd(model, horizon, cfg, r0=r0)
        curve = sol.probe_curve(i)
        return lambda tau: np.log(curve(tau))
    sol = solve_merton_ode(model, horizon, cfg)
    return lambda tau: sol.log_price(i, r0, tau)


def convexity_adjustment(
    model: ModelSpec,
    i: int,
    r0: float,
    maturities=None,
    method: str = "pde",
    cfg: SolverConfig | None = None,
    seed: int = DEFAULT_SEED,
    *,
    horizon: float = 1.0,
) -> ConvexityReport:
    """Convexity adjustment ``a(T) = f_impl(T) - f_exp(T)`` on a maturity grid.

    ``f_impl = -d log F / dT`` is a central difference of half-width
    ``DIFF_STEP`` around each grid point.  With ``method="pde"`` the log-prices
    come from one ODE or finite-difference solve traced at ``r0``; with
    ``method="mc"`` both stencil points use the same simulated paths and the
    error bar follows from the delta method.  The default grid is
    :func:`default_maturity_grid` of ``horizon``.
    """
    cfg = cfg or SolverConfig()
    _require_q(model)
    _check_regime(i)
    method = method.lower()
    if method not in ("pde", "mc"):
        raise InvalidArgumentError(f"method must be 'pde' or 'mc', got {method!r}")
    mats = _check_grid(default_maturity_grid(horizon) if maturities is None else maturities)
    h = DIFF_STEP
    f_exp = np.array([forward_rate(model, i, r0, 0.0, T) for T in mats])
    log_exp = np.array([log_bond_price_expectation(model, i, r0, 0.0, T) for T in mats])
    zeros = np.zeros_like(mats)

    if method == "pde":
        log_f = _pde_log_price(model, i, r0, float(mats[-1]) + h, cfg)
        f_impl = -(log_f(mats + h) - log_f(mats - h)) / (2 * h)
        log_impl = np.asarray(log_f(mats), dtype=float)
        return ConvexityReport(
            model.kind.value, i, r0, method, mats, f_exp, f_impl, f_impl - f_exp, zeros, log_exp, log_impl, zeros
        )

    stencil = np.concatenate([mats - h, mats + h, mats])
    disc = _discount_samples(model, i, r0, stencil, cfg.mc_paths, cfg, seed)
    k = mats.size
    lo, hi, mid = disc[:k], disc[k : 2 * k], disc[2 * k :]
    m_lo, m_hi, m_mid = lo.mean(axis=1), hi.mean(axis=1), mid.mean(axis=1)
    f_impl = -(np.log(m_hi) - np.log(m_lo)) / (2 * h)
    n = disc.shape[1]
    # delta method on the ratio of sample means from common paths
    influence = (hi / m_hi[:, None] - lo / m_lo[:, None]) / (2 * h)
    err = influence.std(axis=1, ddof=1) / math.sqrt(n)
    price_err = mid.std(axis=1, ddof=1) / math.sqrt(n)
    return ConvexityReport(
        model.kind.value, i, r0, method, mats, f_exp, f_impl, f_impl - f_exp, err, log_exp, np.log(m_mid), price_err
    )
