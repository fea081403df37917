"""Regime-switching short-rate models driven by the jump-telegraph process.

Four concrete instances of ``dr = mu dt + sigma dW + eta dN`` are supported:

============  ===================================================
JT_MERTON     dr = mu_i dt + eta_i dN
JT_DOTHAN     dr = r- (mu_i dt + eta_i dN)
JTD_MERTON    dr = mu_i dt + sigma_i dW + eta_i dN
JTD_DOTHAN    dr = r- (mu_i dt + sigma_i dW + eta_i dN)
============  ===================================================

``i`` is the current regime and ``eta`` is the jump applied when leaving it.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from numpy.typing import NDArray
from scipy.special import exprel

from .errors import DegenerateParametersWarning, InvalidArgumentError, InvalidStateError, UnsupportedModelError
from .measure import MeasureParams
from .telegraph import TelegraphParams, _exponential, mean_jt, mgf_jt

DEFAULT_STEP = 1.0 / 256.0


class ModelKind(str, Enum):
    JT_MERTON = "jt_merton"
    JT_DOTHAN = "jt_dothan"
    JTD_MERTON = "jtd_merton"
    JTD_DOTHAN = "jtd_dothan"

    @property
    def diffusive(self) -> bool:
        return self in (ModelKind.JTD_MERTON, ModelKind.JTD_DOTHAN)

    @property
    def dothan(self) -> bool:
        return self in (ModelKind.JT_DOTHAN, ModelKind.JTD_DOTHAN)

    @classmethod
    def parse(cls, value) -> ModelKind:
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        for kind in cls:
            if key in (kind.value, kind.name.lower()):
                return kind
        raise InvalidArgumentError(f"unknown model kind {value!r}; expected one of {[k.value for k in cls]}")


def _pair(value, name: str) -> tuple[float, float]:
    try:
        a, b = value
        pair = (float(a), float(b))
    except (TypeError, ValueError):
        raise InvalidArgumentError(f"{name} must be a pair of numbers, got {value!r}") from None
    if not all(math.isfinite(v) for v in pair):
        raise InvalidArgumentError(f"{name} must be finite")
    return pair


@dataclass(frozen=True)
class ModelSpec:
    """Per-regime parameters of one of the four short-rate models.

    For Dothan kinds ``mu`` and ``sigma`` are relative (per unit rate) and
    ``eta`` is a relative jump.  When ``measure == "Q"`` the intensities are
    the pricing intensities and the drift includes ``sigma * psi``.
    """

    kind: ModelKind
    mu: tuple[float, float]
    eta: tuple[float, float]
    lam: tuple[float, float]
    sigma: tuple[float, float] = (0.0, 0.0)
    measure: str = "Q"
    measure_params: MeasureParams = field(default_factory=MeasureParams)

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "kind", ModelKind.parse(self.kind))
        for name in ("mu", "eta", "lam", "sigma"):
            set_(self, name, _pair(getattr(self, name), name))
        if self.measure not in ("P", "Q"):
            raise InvalidArgumentError(f"measure must be 'P' or 'Q', got {self.measure!r}")
        if min(self.lam) <= 0:
            raise InvalidArgumentError("intensities must be positive")
        if min(self.sigma) < 0:
            raise InvalidArgumentError("volatilities must be non-negative")
        if not self.kind.diffusive and self.sigma != (0.0, 0.0):
            raise InvalidArgumentError(f"{self.kind.value} has no diffusion; sigma must be zero")
        if self.kind.dothan and min(self.eta) <= -1:
            raise InvalidArgumentError("Dothan jumps need eta > -1 to keep the rate positive")
        if 0.0 in self.eta:
            warnings.warn("zero jump size: diagnostic use only", DegenerateParametersWarning, stacklevel=3)

    @property
    def drift(self) -> tuple[float, float]:
        """Drift under the tagged measure: ``mu`` under P, ``mu + sigma psi`` under Q."""
        if self.measure == "P":
            return self.mu
        psi = self.measure_params.psi
        return (self.mu[0] + self.sigma[0] * psi[0], self.mu[1] + self.sigma[1] * psi[1])

    def jump_destination(self, i: int, x):
        """Rate right after leaving regime ``i`` from rate ``x``."""
        return x * (1.0 + self.eta[i]) if self.kind.dothan else x + self.eta[i]

    def telegraph_params(self) -> TelegraphParams:
        """Jump-telegraph parameters of ``r - r0`` (Merton) or ``log(r / r0)`` without its Gaussian part (Dothan)."""
        if self.kind.dothan:
            c = tuple(d - 0.5 * s * s for d, s in zip(self.drift, self.sigma))
            h = (math.log1p(self.eta[0]), math.log1p(self.eta[1]))
        else:
            c, h = self.drift, self.eta
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateParametersWarning)
            return TelegraphParams(c[0], c[1], h[0], h[1], self.lam[0], self.lam[1])


def expected_future_rate(model: ModelSpec, i: int, r: float, tau):
    """``E^Q[r_{t+tau} | r_t = r, eps(t) = i]`` in closed form.

    Merton kinds add the telegraph mean, Dothan kinds scale by the telegraph
    MGF at ``z = 1`` (times ``exp(sigma^2 tau / 2)`` with diffusion).
    """
    if model.measure != "Q":
        raise InvalidStateError("expected future rates are pricing-measure quantities; convert the model first")
    if model.kind.dothan:
        if model.sigma[0] != model.sigma[1]:
            raise UnsupportedModelError("closed form for the diffusive Dothan model needs sigma0 == sigma1")
        s2 = model.sigma[0] ** 2
        return r * mgf_jt(model.telegraph_params(), i, 1.0, tau) * np.exp(0.5 * s2 * np.asarray(tau, dtype=float))
    return r + mean_jt(model.telegraph_params(), i, tau)


# --------------------------------------------------------------------------
# single paths
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RatePath:
    """One simulated short-rate trajectory.

    ``regimes[k]`` holds on ``[times[k], times[k+1])``; ``rates`` are
    right-continuous (post-jump) node values; ``integral[k]`` is
    ``int_0^{times[k]} r ds``.  ``wiener_increments[k]`` is the Brownian
    increment over interval ``k`` (diffusive kinds only).
    """

    times: NDArray[np.float64]
    regimes: NDArray[np.int64]
    rates: NDArray[np.float64]
    integral: NDArray[np.float64]
    switch_index: NDArray[np.int64]
    wiener_increments: NDArray[np.float64] | None
    measure: str

    @property
    def switch_times(self) -> NDArray[np.float64]:
        return self.times[self.switch_index]

    def pre_switch_regimes(self) -> NDArray[np.int64]:
        return 1 - self.regimes[self.switch_index]


def _check_sim_args(r0: float, i0: int, horizon: float, step: float):
    if i0 not in (0, 1):
        raise InvalidArgumentError(f"regime must be 0 or 1, got {i0!r}")
    if not (math.isfinite(horizon) and horizon >= 0):
        raise InvalidArgumentError("horizon must be finite and non-negative")
    if not (step > 0):
        raise InvalidArgumentError("step must be positive")
    if not math.isfinite(r0):
        raise InvalidArgumentError("r0 must be finite")


def _uniform_grid(horizon: float, step: float) -> NDArray[np.float64]:
    n = max(1, math.ceil(horizon / step - 1e-12))
    return np.linspace(0.0, horizon, n + 1)


def simulate_rate(
    model: ModelSpec,
    r0: float,
    i0: int,
    horizon: float,
    rng: np.random.Generator,
    step: float = DEFAULT_STEP,
) -> RatePath:
    """Simulate one path under the model's measure tag.

    Non-diffusive kinds are exact between switches.  Diffusive kinds use exact
    Gaussian increments on a grid of spacing ``step`` refined with every switch
    time; the rate integral is accumulated by the trapezoid rule there.
    """
    _check_sim_args(r0, i0, horizon, step)
    kind = model.kind
    drift, sig = model.drift, model.sigma

    switch_times = []
    t, reg = 0.0, i0
    while True:
        t += float(_exponential(rng, model.lam[reg]))
        if t > horizon:
            break
        switch_times.append(t)
        reg = 1 - reg
    if horizon == 0:
        times = np.array([0.0])
    elif kind.diffusive:
        times = np.union1d(_uniform_grid(horizon, step), switch_times)
    else:
        times = np.union1d([0.0, horizon], switch_times)
    switch_index = np.searchsorted(times, switch_times).astype(np.int64)
    is_switch = np.zeros(times.size, dtype=bool)
    is_switch[switch_index] = True

    n = times.size
    rates = np.empty(n)
    integral = np.zeros(n)
    regimes = np.empty(n, dtype=np.int64)
    dws = np.zeros(max(n - 1, 0)) if kind.diffusive else None
    r, reg = float(r0), i0
    rates[0], regimes[0] = r, reg
    for k in range(n - 1):
        dt = times[k + 1] - times[k]
        m, s = drift[reg], sig[reg]
        if kind.diffusive:
            dw = math.sqrt(dt) * rng.standard_normal()
            dws[k] = dw
            if kind.dothan:
                r_new = r * math.exp((m - 0.5 * s * s) * dt + s * dw)
            else:
                r_new = r + m * dt + s * dw
            area = 0.5 * (r + r_new) * dt
        elif kind.dothan:
            area = r * dt * float(exprel(m * dt))
            r_new = r * math.exp(m * dt)
        else:
            area = r * dt + 0.5 * m * dt * dt
            r_new = r + m * dt
        integral[k + 1] = integral[k] + area
        r = r_new
        if is_switch[k + 1]:
            r = model.jump_destination(reg, r)
            reg = 1 - reg
        rates[k + 1], regimes[k + 1] = r, reg
    return RatePath(
        times=times,
        regimes=regimes,
        rates=rates,
        integral=integral,
        switch_index=switch_index,
        wiener_increments=dws,
        measure=model.measure,
    )


# --------------------------------------------------------------------------
# path ensembles
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Ensemble:
    """Terminal state of many paths simulated side by side.

    Columns are paths.  With antithetic sampling the second half of the
    columns mirrors the first half with negated Brownian increments.
    ``checkpoint_*`` rows correspond to ``checkpoints``.
    """

    rate: NDArray[np.float64]
    integral: NDArray[np.float64]
    time_in: NDArray[np.float64]
    switches_from: NDArray[np.int64]
    dw_by_regime: NDArray[np.float64]
    checkpoints: NDArray[np.float64]
    checkpoint_integral: NDArray[np.float64]
    checkpoint_rate: NDArray[np.float64]
    measure: str
    antithetic: bool = False

    @property
    def n_paths(self) -> int:
        return int(self.rate.size)


def simulate_ensemble(
    model: ModelSpec,
    r0: float,
    i0: int,
    horizon: float,
    n_paths: int,
    rng: np.random.Generator,
    *,
    step: float = DEFAULT_STEP,
    checkpoints=None,
    antithetic: bool = False,
) -> Ensemble:
    """Vectorised version of :func:`simulate_rate` returning terminal statistics.

    Paths advance together from stop to stop (the uniform grid for diffusive
    kinds, only ``checkpoints`` and ``horizon`` otherwise); switches falling
    inside an interval are handled path by path at their exact times.
    """
    _check_sim_args(r0, i0, horizon, step)
    if antithetic:
        if not model.kind.diffusive:
            raise InvalidArgumentError("antithetic sampling applies to diffusive kinds only")
        if n_paths % 2:
            raise InvalidArgumentError("antithetic sampling needs an even number of paths")
    checkpoints = np.asarray([] if checkpoints is None else checkpoints, dtype=float)
    if checkpoints.size and (checkpoints.min() < 0 or checkpoints.max() > horizon):
        raise InvalidArgumentError("checkpoints must lie in [0, horizon]")

    kind = model.kind
    copies = 2 if antithetic else 1
    m_paths = n_paths // copies
    sign = np.array([1.0, -1.0])[:copies, None]
    drift = np.asarray(model.drift)
    sig = np.asarray(model.sigma)
    lam = np.asarray(model.lam)
    eta = np.asarray(model.eta)

    stops = np.union1d(checkpoints, [horizon])
    if kind.diffusive and horizon > 0:
        stops = np.union1d(stops, _uniform_grid(horizon, step))
    stops = stops[stops > 0]
    cp_lookup = {float(c): k for k, c in enumerate(checkpoints)}

    r = np.full((copies, m_paths), float(r0))
    area = np.zeros((copies, m_paths))
    reg = np.full(m_paths, i0, dtype=np.int64)
    t_now = np.zeros(m_paths)
    next_switch = _exponential(rng, lam[reg], m_paths)
    switches = np.zeros((2, m_paths), dtype=np.int64)
    # per-path coefficients of the current regime, refreshed at switches
    in1 = np.full(m_paths, float(i0))
    m_path = np.full(m_paths, drift[i0])
    s_path = np.full(m_paths, sig[i0])
    time_in1 = np.zeros(m_paths)
    dw_total = np.zeros(m_paths)
    dw_in1 = np.zeros(m_paths)
    cp_area = np.zeros((checkpoints.size, copies, m_paths))
    cp_rate = np.zeros((checkpoints.size, copies, m_paths))
    for k, c in enumerate(checkpoints):
        if c == 0:
            cp_rate[k] = r0

    def evolve(r_i, m, s, dt, n):
        """New rates and trapezoid/exact area increments over ``dt``."""
        if kind.diffusive:
            dw = np.sqrt(dt) * rng.standard_normal(n)
            if kind.dothan:
                r_new = r_i * np.exp((m - 0.5 * s * s) * dt + s * dw * sign)
            else:
                r_new = r_i + m * dt + s * dw * sign
            return r_new, 0.5 * (r_i + r_new) * dt, dw
        if kind.dothan:
            return r_i * np.exp(m * dt), r_i * dt * exprel(m * dt), None
        return r_i + m * dt, r_i * dt + 0.5 * m * dt * dt, None

    for stop in stops:
        while True:
            idx = np.nonzero(next_switch <= stop)[0]
            if idx.size == 0:
                break
            dt = next_switch[idx] - t_now[idx]
            r_new, d_area, dw = evolve(r[:, idx], m_path[idx], s_path[idx], dt, idx.size)
            area[:, idx] += d_area
            time_in1[idx] += dt * in1[idx]
            if dw is not None:
                dw_total[idx] += dw
                dw_in1[idx] += dw * in1[idx]
            rg = reg[idx]
            r[:, idx] = r_new * (1.0 + eta[rg]) if kind.dothan else r_new + eta[rg]
            switches[rg, idx] += 1
            t_now[idx] = next_switch[idx]
            new = 1 - rg
            reg[idx] = new
            in1[idx] = new
            m_path[idx] = drift[new]
            s_path[idx] = sig[new]
            next_switch[idx] += _exponential(rng, lam[new], idx.size)
        dt = stop - t_now
        r_new, d_area, dw = evolve(r, m_path, s_path, dt, m_paths)
        area += d_area
        time_in1 += dt * in1
        if dw is not None:
            dw_total += dw
            dw_in1 += dw * in1
        r = r_new
        t_now[:] = stop
        k = cp_lookup.get(float(stop))
        if k is not None:
            cp_area[k] = area
            cp_rate[k] = r

    def flat(a):
        return a.reshape(a.shape[:-2] + (a.shape[-2] * a.shape[-1],))

    def dup(a):
        return np.concatenate([a] * copies, axis=-1)

    time_in = np.stack([horizon - time_in1, time_in1])
    dw_reg = np.stack([dw_total - dw_in1, dw_in1])
    dw_all = np.concatenate([dw_reg * sg for sg in (1.0, -1.0)[:copies]], axis=-1)
    return Ensemble(
        rate=flat(r),
        integral=flat(area),
        time_in=dup(time_in),
        switches_from=dup(switches),
        dw_by_regime=dw_all,
        checkpoints=checkpoints,
        checkpoint_integral=flat(cp_area),
        checkpoint_rate=flat(cp_rate),
        measure=model.measure,
        antithetic=antithetic,
    )
