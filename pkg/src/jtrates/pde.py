"""Numerical solutions of the coupled bond-pricing PDE system.

For each regime ``i`` the price ``F_i(t, x)`` of a bond maturing at ``T``
solves::

    dF_i/dt + a_i(x) dF_i/dx + b_i(x)^2 / 2 d2F_i/dx2
        + lam_i [F_{1-i}(t, j_i(x)) - F_i(t, x)] = x F_i,     F_i(T, x) = 1

with Q drift ``a_i``, volatility ``b_i`` and post-jump rate ``j_i(x)``.
Merton kinds reduce to two ODEs through ``F_i = exp(-x tau + D_i(tau))``;
Dothan kinds are solved with an implicit upwind finite-difference scheme.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Protocol

import numpy as np
import scipy.sparse as sp
from numpy.typing import NDArray
from scipy.interpolate import CubicHermiteSpline, CubicSpline
from scipy.sparse.linalg import splu

from .analytic import bond_price_expectation
from .config import SolverConfig
from .errors import ConfigError, InvalidArgumentError, InvalidStateError, UnsupportedModelError
from .models import ModelSpec


class PriceSurface(Protocol):
    maturity: float

    def value(self, i: int, t: float, x: float) -> float: ...


def _require_q(model: ModelSpec):
    if model.measure != "Q":
        raise InvalidStateError("PDE prices are computed under a Q-tagged model")


# --------------------------------------------------------------------------
# Merton family: ODE reduction
# --------------------------------------------------------------------------


def merton_ode_rhs(model: ModelSpec, tau: float, d: tuple[float, float]) -> tuple[float, float]:
    """``dD_i/dtau`` for the affine ansatz ``F_i = exp(-x tau + D_i(tau))``."""
    a, s, lam, eta = model.drift, model.sigma, model.lam, model.eta
    return tuple(
        -a[i] * tau + 0.5 * s[i] ** 2 * tau * tau + lam[i] * math.expm1(-eta[i] * tau + d[1 - i] - d[i])
        for i in (0, 1)
    )


@dataclass(frozen=True)
class OdeReduction:
    """``D_i`` sampled on a time-to-maturity grid, with cubic Hermite interpolation."""

    maturity: float
    tau: NDArray[np.float64]
    d: NDArray[np.float64]
    d_prime: NDArray[np.float64]
    step: float

    def __post_init__(self):
        splines = [CubicHermiteSpline(self.tau, self.d[:, i], self.d_prime[:, i]) for i in (0, 1)]
        object.__setattr__(self, "_splines", splines)

    def D(self, i: int, tau):
        tau = np.asarray(tau, dtype=float)
        if np.any(tau < -1e-14) or np.any(tau > self.maturity * (1 + 1e-12)):
            raise InvalidArgumentError("time to maturity outside the solved range")
        out = self._splines[i](np.clip(tau, 0.0, self.maturity))
        return float(out) if out.ndim == 0 else out

    def C(self, tau):
        return -np.asarray(tau, dtype=float)

    def log_price(self, i: int, x, tau=None):
        tau = self.maturity if tau is None else tau
        return self.C(tau) * x + self.D(i, tau)

    def price(self, i: int, x, tau=None):
        """``F_i`` at rate ``x`` and time to maturity ``tau`` (default: the full maturity)."""
        return np.exp(self.log_price(i, x, tau))

    def forward(self, i: int, x, tau):
        """Implied forward ``-d log F / d tau = x - D_i'(tau)``."""
        return x - self._splines[i](tau, 1)

    def value(self, i: int, t: float, x: float) -> float:
        return float(self.price(i, x, self.maturity - t))


def solve_merton_ode(model: ModelSpec, maturity: float, cfg: SolverConfig | None = None) -> OdeReduction:
    """Integrate the affine ``D``-system with classical fixed-step RK4."""
    cfg = cfg or SolverConfig()
    if model.kind.dothan:
        raise UnsupportedModelError("the affine ODE reduction applies to Merton kinds only")
    _require_q(model)
    if not (math.isfinite(maturity) and maturity >= 0):
        raise InvalidArgumentError("maturity must be finite and non-negative")
    n = max(1, math.ceil(maturity / cfg.ode_step - 1e-9))
    h = maturity / n
    tau = np.linspace(0.0, maturity, n + 1)
    d = np.zeros((n + 1, 2))
    dp = np.zeros((n + 1, 2))
    f = lambda s, y: merton_ode_rhs(model, s, y)  # noqa: E731
    y = (0.0, 0.0)
    dp[0] = f(0.0, y)
    for k in range(n):
        s = tau[k]
        k1 = dp[k]
        k2 = f(s + h / 2, (y[0] + h / 2 * k1[0], y[1] + h / 2 * k1[1]))
        k3 = f(s + h / 2, (y[0] + h / 2 * k2[0], y[1] + h / 2 * k2[1]))
        k4 = f(s + h, (y[0] + h * k3[0], y[1] + h * k3[1]))
        y = (
            y[0] + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
            y[1] + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]),
        )
        d[k + 1] = y
        dp[k + 1] = f(tau[k + 1], y)
    if maturity == 0:
        tau = np.array([0.0, 1e-300])
        d = np.zeros((2, 2))
        dp = np.zeros((2, 2))
    return OdeReduction(maturity=float(maturity), tau=tau, d=d, d_prime=dp, step=h)


# --------------------------------------------------------------------------
# Dothan family: finite differences
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class FdSolution:
    """Price surfaces on ``[0, x_max]`` at stored time levels.

    ``surfaces[k, i]`` is ``F_i(times[k], x)``.  ``probe_tau``/``probe_values``
    hold ``F_i`` at the probe rate for every time step of the scheme.
    """

    maturity: float
    x: NDArray[np.float64]
    times: NDArray[np.float64]
    surfaces: NDArray[np.float64]
    nx: int
    nt: int
    x_max: float
    coupling: str
    max_increase: float
    probe: float | None = None
    probe_tau: NDArray[np.float64] | None = None
    probe_values: NDArray[np.float64] | None = None

    def _level(self, t: float) -> int:
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) > 1e-12 * max(1.0, self.maturity):
            raise InvalidArgumentError(f"t={t} is not a stored time level")
        return k

    def price(self, i: int, x, t: float = 0.0):
        """``F_i(t, x)`` at a stored level, linear in ``x``."""
        x = np.asarray(x, dtype=float)
        if np.any(x < 0) or np.any(x > self.x_max):
            raise InvalidArgumentError("rate outside the finite-difference domain")
        out = np.interp(x, self.x, self.surfaces[self._level(t), i])
        return float(out) if out.ndim == 0 else out

    def value(self, i: int, t: float, x: float) -> float:
        """``F_i(t, x)``, linear in both ``t`` (between stored levels) and ``x``."""
        if not (0 <= t <= self.maturity) or not (0 <= x <= self.x_max):
            raise InvalidArgumentError("point outside the finite-difference domain")
        k = int(np.searchsorted(self.times, t))
        if k == 0 or self.times[k] == t:
            return float(np.interp(x, self.x, self.surfaces[k, i]))
        w = (t - self.times[k - 1]) / (self.times[k] - self.times[k - 1])
        lo = np.interp(x, self.x, self.surfaces[k - 1, i])
        hi = np.interp(x, self.x, self.surfaces[k, i])
        return float((1 - w) * lo + w * hi)

    def probe_curve(self, i: int) -> CubicSpline:
        """Spline of ``F_i(probe)`` against time to maturity."""
        if self.probe_values is None:
            raise InvalidStateError("solve was run without a probe rate")
        return CubicSpline(self.probe_tau, self.probe_values[:, i])

    def is_monotone(self, tol: float = 1e-12) -> bool:
        """Prices were non-increasing in ``x`` at every time step."""
        return self.max_increase <= tol

    def to_csv_rows(self):
        for k, t in enumerate(self.times):
            for j, x in enumerate(self.x):
                yield (t, x, self.surfaces[k, 0, j], self.surfaces[k, 1, j])


def default_xmax(model: ModelSpec, maturity: float, r0: float = 0.0) -> float:
    """Truncation of the rate axis: ``8 r0 exp((max|a_i| + sigma^2) T)``, at least 1."""
    growth = max(abs(a) for a in model.drift) + max(model.sigma) ** 2
    return max(1.0, 8.0 * abs(r0) * math.exp(growth * maturity))


def _interp_matrix(x: NDArray[np.float64], y: NDArray[np.float64]) -> sp.csr_matrix:
    """Linear interpolation from grid ``x`` to points ``y``; linear extrapolation above ``x[-1]``."""
    n = x.size
    dx = x[1] - x[0]
    j = np.clip(np.floor(y / dx).astype(np.int64), 0, n - 2)
    w = (y - x[j]) / dx
    rows = np.arange(y.size)
    return sp.csr_matrix(
        (np.concatenate([1 - w, w]), (np.concatenate([rows, rows]), np.concatenate([j, j + 1]))),
        shape=(y.size, n),
    )


def _regime_operator(drift: float, sigma: float, lam: float, x: NDArray[np.float64]) -> sp.csr_matrix:
    """Upwind transport, central diffusion and reaction ``-(x + lam)`` in one regime."""
    n = x.size
    dx = x[1] - x[0]
    v = drift * x
    diff = 0.5 * sigma * sigma * x * x / dx**2
    lower = np.zeros(n)
    main = -(x + lam)
    upper = np.zeros(n)
    # information travels from larger x when v > 0 (solving forward in tau)
    fwd = v > 0
    fwd[-1] = False  # ghost node by linear extrapolation: forward == backward difference
    back = ~fwd & (v != 0)
    back[0] = False
    main = main - np.where(fwd, v, 0.0) / dx + np.where(back, v, 0.0) / dx
    upper += np.where(fwd, v, 0.0) / dx
    lower -= np.where(back, v, 0.0) / dx
    inner = np.zeros(n, dtype=bool)
    inner[1:-1] = True
    lower += np.where(inner, diff, 0.0)
    upper += np.where(inner, diff, 0.0)
    main -= np.where(inner, 2 * diff, 0.0)
    return sp.diags([lower[1:], main, upper[:-1]], [-1, 0, 1], format="csr")


def solve_dothan_fd(
    model: ModelSpec,
    maturity: float,
    cfg: SolverConfig | None = None,
    *,
    r0: float | None = None,
) -> FdSolution:
    """Backward-Euler upwind scheme for the Dothan-family pricing system.

    The rate axis is ``[0, x_max]`` with no boundary data at ``x = 0`` (the
    transport and diffusion coefficients vanish there).  At ``x_max`` the
    second difference is dropped and jump destinations beyond the grid are
    linearly extrapolated.  Passing ``r0`` sizes the default domain and
    records ``F_i(r0)`` at every time step.
    """
    cfg = cfg or SolverConfig()
    if not model.kind.dothan:
        raise UnsupportedModelError("the finite-difference engine handles Dothan kinds")
    _require_q(model)
    if not (math.isfinite(maturity) and maturity > 0):
        raise InvalidArgumentError("maturity must be positive")
    x_max = cfg.fd_xmax if cfg.fd_xmax is not None else default_xmax(model, maturity, r0 or 0.0)
    if r0 is not None and (r0 < 0 or r0 * (1 + max(model.eta)) > x_max):
        raise ConfigError(f"x_max={x_max} does not contain r0 * (1 + max eta) for r0={r0}", field="fd_xmax")

    nx, nt = cfg.fd_nx, cfg.fd_nt
    x = np.linspace(0.0, x_max, nx + 1)
    dt = maturity / nt
    ops = [_regime_operator(model.drift[i], model.sigma[i], model.lam[i], x) for i in (0, 1)]
    jumps = [model.lam[i] * _interp_matrix(x, x * (1 + model.eta[i])) for i in (0, 1)]
    eye = sp.identity(nx + 1, format="csc")

    store_every = max(1, math.ceil(nt / (cfg.fd_store_levels - 1)))
    stored_steps = sorted(set(range(0, nt + 1, store_every)) | {nt})
    store_pos = {n: k for k, n in enumerate(stored_steps)}
    surfaces = np.empty((len(stored_steps), 2, nx + 1))
    probe_values = np.empty((nt + 1, 2)) if r0 is not None else None

    f = np.ones((2, nx + 1))
    max_increase = -math.inf

    def record(n):
        nonlocal max_increase
        max_increase = max(max_increase, float(np.diff(f, axis=1).max()))
        if n in store_pos:
            surfaces[store_pos[n]] = f
        if probe_values is not None:
            probe_values[n] = [np.interp(r0, x, f[0]), np.interp(r0, x, f[1])]

    record(0)
    if cfg.fd_coupling == "implicit":
        system = sp.bmat([[ops[0], jumps[0]], [jumps[1], ops[1]]], format="csc")
        lu = splu((sp.identity(2 * (nx + 1), format="csc") - dt * system).tocsc())
        for n in range(1, nt + 1):
            f = lu.solve(f.ravel()).reshape(2, nx + 1)
            record(n)
    else:
        lus = [splu((eye - dt * ops[i]).tocsc()) for i in (0, 1)]
        for n in range(1, nt + 1):
            coupled = [np.maximum(jumps[i] @ f[1 - i], 0.0) for i in (0, 1)]
            f = np.stack([lus[i].solve(f[i] + dt * coupled[i]) for i in (0, 1)])
            record(n)

    # level n is time-to-maturity n*dt; expose surfaces on the calendar axis t = T - tau
    taus = np.array(stored_steps) * dt
    order = np.argsort(maturity - taus)
    return FdSolution(
        maturity=float(maturity),
        x=x,
        times=(maturity - taus)[order],
        surfaces=surfaces[order],
        nx=nx,
        nt=nt,
        x_max=x_max,
        coupling=cfg.fd_coupling,
        max_increase=max_increase,
        probe=r0,
        probe_tau=np.arange(nt + 1) * dt if r0 is not None else None,
        probe_values=probe_values,
    )


def bond_prices_pde(model: ModelSpec, r0: float, maturity: float, cfg: SolverConfig | None = None) -> tuple[float, float]:
    """``(F_0, F_1)`` at ``(0, r0)`` from one ODE (Merton) or finite-difference (Dothan) solve."""
    if maturity == 0:
        return (1.0, 1.0)
    if model.kind.dothan:
        sol = solve_dothan_fd(model, maturity, cfg, r0=r0)
    else:
        sol = solve_merton_ode(model, maturity, cfg)
    return (float(sol.price(0, r0)), float(sol.price(1, r0)))


def price_bond_pde(model: ModelSpec, i: int, r0: float, maturity: float, cfg: SolverConfig | None = None) -> float:
    """``F_i(0, r0)``; see :func:`bond_prices_pde`."""
    if i not in (0, 1):
        raise InvalidArgumentError(f"regime must be 0 or 1, got {i!r}")
    return bond_prices_pde(model, r0, maturity, cfg)[i]


# --------------------------------------------------------------------------
# residual of the PDE system
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ExpectationSurface:
    """The expectation-hypothesis price viewed as a candidate PDE solution."""

    model: ModelSpec
    maturity: float

    def value(self, i: int, t: float, x: float) -> float:
        return bond_price_expectation(self.model, i, x, t, self.maturity)


def feynman_kac_residual(
    model: ModelSpec,
    F: PriceSurface | Callable[[int, float, float], float],
    t: float,
    x: float,
    steps: tuple[float, float] = SolverConfig().fd_check_steps,
) -> tuple[float, float]:
    """``dF_i/dt + L F_i - x F_i`` for both regimes by central differences.

    ``F`` is either an object with ``value(i, t, x)`` (and ``maturity``) or a
    plain callable ``F(i, t, x)``.
    """
    _require_q(model)
    ht, hx = steps
    value = F.value if hasattr(F, "value") else F
    maturity = getattr(F, "maturity", None)
    if maturity is not None and (t - ht < 0 or t + ht > maturity):
        raise InvalidArgumentError("residual stencil leaves [0, maturity]")
    if model.kind.dothan and x - hx < 0:
        raise InvalidArgumentError("residual stencil leaves the rate domain x >= 0")
    out = []
    for i in (0, 1):
        f0 = value(i, t, x)
        f_t = (value(i, t + ht, x) - value(i, t - ht, x)) / (2 * ht)
        fp, fm = value(i, t, x + hx), value(i, t, x - hx)
        f_x = (fp - fm) / (2 * hx)
        f_xx = (fp - 2 * f0 + fm) / hx**2
        scale = x if model.kind.dothan else 1.0
        drift = model.drift[i] * scale
        vol = model.sigma[i] * scale
        jump = value(1 - i, t, model.jump_destination(i, x))
        out.append(f_t + drift * f_x + 0.5 * vol * vol * f_xx + model.lam[i] * (jump - f0) - x * f0)
    return out[0], out[1]
