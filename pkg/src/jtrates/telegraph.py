"""Two-state jump-telegraph process.

The regime ``eps(t)`` is a continuous-time Markov chain on {0, 1} that leaves
state ``i`` at rate ``lam_i``.  The jump-telegraph process integrates the
regime drift and adds a regime-dependent jump at every switch::

    Y_t = int_0^t c_{eps(s)} ds + sum_{j <= N_t} h_{eps(tau_j -)}

This module provides the closed-form mean and moment generating function,
exact path sampling, and Monte Carlo statistics for the compensated
martingales built from the switch counter ``N``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DegenerateParametersWarning, InvalidArgumentError, MgfOverflowError
from .rng import DEFAULT_BLOCK_SIZE, mean_and_stderr, run_blocks

_LOG_FLOAT_MAX = math.log(np.finfo(float).max)


@dataclass(frozen=True)
class TelegraphParams:
    """Drifts ``c``, switch jumps ``h`` and leaving intensities ``lam`` per regime."""

    c0: float
    c1: float
    h0: float
    h1: float
    lam0: float
    lam1: float

    def __post_init__(self):
        values = (self.c0, self.c1, self.h0, self.h1, self.lam0, self.lam1)
        if not all(math.isfinite(v) for v in values):
            raise InvalidArgumentError(f"telegraph parameters must be finite, got {values}")
        if self.lam0 <= 0 or self.lam1 <= 0:
            raise InvalidArgumentError("switching intensities must be positive")
        if self.c0 == self.c1 or self.h0 == 0 or self.h1 == 0:
            warnings.warn(
                "degenerate jump-telegraph parameters (c0 == c1 or a zero jump); "
                "accepted for diagnostics",
                DegenerateParametersWarning,
                stacklevel=3,
            )

    @property
    def c(self) -> tuple[float, float]:
        return (self.c0, self.c1)

    @property
    def h(self) -> tuple[float, float]:
        return (self.h0, self.h1)

    @property
    def lam(self) -> tuple[float, float]:
        return (self.lam0, self.lam1)

    def swapped(self) -> TelegraphParams:
        """Same process with the two regime labels exchanged."""
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateParametersWarning)
            return TelegraphParams(self.c1, self.c0, self.h1, self.h0, self.lam1, self.lam0)


def _check_regime(i: int) -> int:
    if i not in (0, 1):
        raise InvalidArgumentError(f"regime must be 0 or 1, got {i!r}")
    return int(i)


def _check_times(t: ArrayLike, name: str = "t") -> NDArray[np.float64]:
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)):
        raise InvalidArgumentError(f"{name} must be finite")
    if np.any(t < 0):
        raise InvalidArgumentError(f"{name} must be non-negative")
    return t


def _scalar_or_array(x: NDArray[np.float64]):
    return float(x) if x.ndim == 0 else x


def mean_jt(params: TelegraphParams, i: int, t: ArrayLike):
    """Conditional mean ``m_i(t) = E[Y_t | eps(0) = i]``.

    ``t`` may be an array; a float is returned for scalar input.
    """
    i = _check_regime(i)
    t = _check_times(t)
    lam0, lam1 = params.lam
    two_lam = lam0 + lam1
    d0 = params.c0 + lam0 * params.h0
    d1 = params.c1 + lam1 * params.h1
    transient = -np.expm1(-two_lam * t) / two_lam
    sign = 1.0 if i == 0 else -1.0
    out = ((lam1 * d0 + lam0 * d1) * t + sign * params.lam[i] * (d0 - d1) * transient) / two_lam
    return _scalar_or_array(out)


def _one_minus_exp_over(u: NDArray[np.float64]) -> NDArray[np.float64]:
    """``(1 - e^{-u}) / u`` with the removable point ``u = 0`` filled in."""
    out = np.ones_like(u)
    big = np.abs(u) > 1e-8
    out[big] = -np.expm1(-u[big]) / u[big]
    small = ~big
    out[small] = 1.0 - u[small] / 2.0
    return out


def log_mgf_jt(params: TelegraphParams, i: int, z: ArrayLike, t: ArrayLike):
    """Natural log of ``E[exp(z Y_t) | eps(0) = i]``.

    For real ``z`` the discriminant
    ``D = (a z - kappa)^2 + lam0 lam1 exp(z H)`` is positive.  The hyperbolic
    form is evaluated after factoring out ``exp(t sqrt(D))``, so large ``t``
    does not overflow the intermediate cosh/sinh.  ``D < 0`` (reachable only
    through round-off) uses the trigonometric continuation.
    """
    i = _check_regime(i)
    t = _check_times(t)
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise InvalidArgumentError("z must be finite")
    z, t = np.broadcast_arrays(z, t)
    shape = z.shape
    z = z.astype(float).ravel()
    t = t.astype(float).ravel()
    lam0, lam1 = params.lam
    c = 0.5 * (params.c0 + params.c1)
    a = 0.5 * (params.c0 - params.c1)
    kappa = 0.5 * (lam0 - lam1)
    lam = 0.5 * (lam0 + lam1)
    big_h = params.h0 + params.h1
    sign = 1.0 if i == 0 else -1.0

    with np.errstate(over="ignore"):
        disc = (a * z - kappa) ** 2 + lam0 * lam1 * np.exp(z * big_h)
        k = sign * (a * z - kappa) + params.lam[i] * np.exp(z * params.h[i])
    if not (np.all(np.isfinite(disc)) and np.all(np.isfinite(k))):
        raise MgfOverflowError("moment generating function overflows for these z")

    out = np.empty_like(z)
    pos = disc >= 0
    if np.any(pos):
        s = np.sqrt(disc[pos])
        tt = t[pos]
        u = 2.0 * tt * s
        bracket = 0.5 * (1.0 + np.exp(-u)) + k[pos] * tt * _one_minus_exp_over(u)
        out[pos] = tt * (c * z[pos] - lam + s) + np.log(bracket)
    neg = ~pos
    if np.any(neg):
        w = np.sqrt(-disc[neg])
        tt = t[neg]
        bracket = np.cos(tt * w) + k[neg] * tt * np.sinc(tt * w / np.pi)
        out[neg] = tt * (c * z[neg] - lam) + np.log(bracket)
    if not np.all(np.isfinite(out)):
        raise MgfOverflowError("moment generating function is not representable")
    return float(out[0]) if shape == () else out.reshape(shape)


def mgf_jt(params: TelegraphParams, i: int, z: ArrayLike, t: ArrayLike):
    """Moment generating function ``phi_i(z, t) = E[exp(z Y_t) | eps(0) = i]``.

    Raises
    ------
    MgfOverflowError
        If the value exceeds the largest float64 instead of returning ``inf``.
    """
    log_phi = log_mgf_jt(params, i, z, t)
    if np.any(np.asarray(log_phi) > _LOG_FLOAT_MAX):
        raise MgfOverflowError(f"phi_{i}(z, t) exceeds float64 range (log value {np.max(log_phi):.1f})")
    return math.exp(log_phi) if isinstance(log_phi, float) else np.exp(log_phi)


@dataclass(frozen=True)
class TelegraphPath:
    """One exactly sampled trajectory of ``Y`` on ``[0, horizon]``.

    ``regimes[k]`` is the regime on the k-th segment, ``switch_times[k]`` ends
    segment ``k`` and ``y_switch[k]`` is ``Y`` just after that switch.
    """

    initial_regime: int
    horizon: float
    switch_times: NDArray[np.float64]
    regimes: NDArray[np.int64]
    y_switch: NDArray[np.float64]
    y_horizon: float

    @property
    def n_switches(self) -> int:
        return int(self.switch_times.size)

    def count_at(self, t: float) -> int:
        """``N_t``: number of switches in ``[0, t]``."""
        return int(np.searchsorted(self.switch_times, t, side="right"))


def _exponential(rng: np.random.Generator, rate, size=None):
    # inverse CDF with U in (0, 1] so the log never sees zero
    u = 1.0 - rng.random(size)
    return -np.log(u) / rate


def sample_path(params: TelegraphParams, i: int, horizon: float, rng: np.random.Generator) -> TelegraphPath:
    """Sample a path exactly from exponential holding times."""
    i = _check_regime(i)
    horizon = float(_check_times(horizon, "horizon"))
    regime = i
    t = 0.0
    y = 0.0
    times, regimes, ys = [], [i], []
    while True:
        hold = float(_exponential(rng, params.lam[regime]))
        if t + hold > horizon:
            y += params.c[regime] * (horizon - t)
            break
        t += hold
        y += params.c[regime] * hold + params.h[regime]
        regime = 1 - regime
        times.append(t)
        regimes.append(regime)
        ys.append(y)
    return TelegraphPath(
        initial_regime=i,
        horizon=horizon,
        switch_times=np.array(times, dtype=float),
        regimes=np.array(regimes, dtype=np.int64),
        y_switch=np.array(ys, dtype=float),
        y_horizon=y,
    )


@dataclass(frozen=True)
class Occupation:
    """Sufficient statistics of many regime paths on ``[0, t]``.

    ``time_in[k]`` is the time spent in regime ``k`` and ``switches_from[k]``
    the number of switches out of regime ``k``, one column per path.
    """

    time_in: NDArray[np.float64]
    switches_from: NDArray[np.int64]
    final_regime: NDArray[np.int64]

    @property
    def n_switches(self) -> NDArray[np.int64]:
        return self.switches_from.sum(axis=0)

    def telegraph_value(self, params: TelegraphParams) -> NDArray[np.float64]:
        """``Y_t`` on every path."""
        return (
            params.c0 * self.time_in[0]
            + params.c1 * self.time_in[1]
            + params.h0 * self.switches_from[0]
            + params.h1 * self.switches_from[1]
        )


def sample_occupation(
    lam: tuple[float, float], i: int, t: float, n_paths: int, rng: np.random.Generator
) -> Occupation:
    """Vectorised exact simulation of the regime chain for ``n_paths`` paths."""
    i = _check_regime(i)
    t = float(_check_times(t))
    lam_arr = np.asarray(lam, dtype=float)
    regime = np.full(n_paths, i, dtype=np.int64)
    elapsed = np.zeros(n_paths)
    time_in = np.zeros((2, n_paths))
    switches = np.zeros((2, n_paths), dtype=np.int64)
    active = np.arange(n_paths)
    while active.size:
        reg = regime[active]
        hold = _exponential(rng, lam_arr[reg], reg.size)
        remaining = t - elapsed[active]
        jump = hold <= remaining
        dur = np.where(jump, hold, remaining)
        time_in[reg, active] += dur
        elapsed[active] += dur
        switches[reg[jump], active[jump]] += 1
        regime[active[jump]] ^= 1
        active = active[jump]
    return Occupation(time_in=time_in, switches_from=switches, final_regime=regime)


@dataclass(frozen=True)
class MartingaleSummary:
    """Monte Carlo ``(mean, stderr)`` of the four test martingales at time ``t``."""

    z: tuple[float, float]
    stochastic_exp_z: tuple[float, float]
    m: tuple[float, float]
    l_theta: tuple[float, float]
    n_paths: int
    theoretical: dict = field(
        default_factory=lambda: {"z": 0.0, "stochastic_exp_z": 1.0, "m": 0.0, "l_theta": 1.0}
    )

    def z_scores(self) -> dict[str, float]:
        """``(mean - theoretical) / stderr`` per process; 0 when stderr is 0 and the mean is exact."""
        out = {}
        for name, target in self.theoretical.items():
            mean, err = getattr(self, name)
            diff = mean - target
            out[name] = 0.0 if diff == 0 else (diff / err if err > 0 else math.inf)
        return out


def martingale_stats(
    params: TelegraphParams,
    i: int,
    t: float,
    n_paths: int,
    seed: int,
    *,
    theta: tuple[float, float] = (1.0, 1.0),
    block_size: int = DEFAULT_BLOCK_SIZE,
    workers: int = 1,
) -> MartingaleSummary:
    """Sample means of the compensated jump martingales.

    Uses ``h`` from ``params`` for ``Z_t`` and its stochastic exponential,
    the switch counter for ``M_t`` and the explicit multipliers ``theta``
    for the density ``L_t^theta``.  Drifts ``c`` are not used.
    """
    i = _check_regime(i)
    if n_paths < 2:
        raise InvalidArgumentError("n_paths must be at least 2")
    h0, h1 = params.h
    if h0 <= -1 or h1 <= -1:
        raise InvalidArgumentError("the stochastic exponential of Z needs h0, h1 > -1")
    th0, th1 = float(theta[0]), float(theta[1])
    if not (th0 > 0 and th1 > 0):
        raise InvalidArgumentError("theta multipliers must be positive")
    lam0, lam1 = params.lam

    def block(rng, n):
        occ = sample_occupation(params.lam, i, t, n, rng)
        t0, t1 = occ.time_in
        n0, n1 = occ.switches_from
        compensator = h0 * lam0 * t0 + h1 * lam1 * t1
        z = h0 * n0 + h1 * n1 - compensator
        exp_z = np.exp(-compensator + n0 * np.log1p(h0) + n1 * np.log1p(h1))
        m = (n0 + n1) - (lam0 * t0 + lam1 * t1)
        l_theta = np.exp((1 - th0) * lam0 * t0 + (1 - th1) * lam1 * t1 + n0 * math.log(th0) + n1 * math.log(th1))
        return np.stack([z, exp_z, m, l_theta])

    samples = np.concatenate(run_blocks(block, n_paths, seed, block_size=block_size, workers=workers), axis=1)
    stats = [mean_and_stderr(row) for row in samples]
    return MartingaleSummary(z=stats[0], stochastic_exp_z=stats[1], m=stats[2], l_theta=stats[3], n_paths=n_paths)
