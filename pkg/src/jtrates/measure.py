"""Equivalent martingale measures for the regime-switching short rate.

A measure change is specified by positive intensity multipliers ``theta_i``
and market prices of diffusion risk ``psi_i``.  Under the new measure the
switch intensities become ``theta_i * lam_i`` and the Brownian motion picks up
the drift ``psi_{eps(t)}``, so the rate drift becomes ``mu_i + sigma_i psi_i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING

import numpy as np

from .errors import InvalidArgumentError, InvalidStateError

if TYPE_CHECKING:
    from .models import Ensemble, ModelSpec, RatePath


@dataclass(frozen=True)
class MeasureParams:
    theta0: float = 1.0
    theta1: float = 1.0
    psi0: float = 0.0
    psi1: float = 0.0

    def __post_init__(self):
        for name in ("theta0", "theta1", "psi0", "psi1"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidArgumentError(f"{name} must be finite")
            object.__setattr__(self, name, float(value))
        if self.theta0 <= 0 or self.theta1 <= 0:
            raise InvalidArgumentError("theta multipliers must be positive")

    @property
    def theta(self) -> tuple[float, float]:
        return (self.theta0, self.theta1)

    @property
    def psi(self) -> tuple[float, float]:
        return (self.psi0, self.psi1)

    @property
    def is_identity(self) -> bool:
        return self.theta == (1.0, 1.0) and self.psi == (0.0, 0.0)


def to_risk_neutral(model: ModelSpec) -> ModelSpec:
    """Map a physical-measure model to its pricing-measure counterpart.

    The intensities are rescaled to ``theta_i * lam_i``; the drift shift
    ``sigma_i * psi_i`` is carried by ``ModelSpec.drift`` once the tag is Q.
    """
    if model.measure == "Q":
        raise InvalidStateError("model is already tagged with the pricing measure Q")
    mp = model.measure_params
    lam_q = (mp.theta0 * model.lam[0], mp.theta1 * model.lam[1])
    return replace(model, lam=lam_q, measure="Q")


def _log_density(mp: MeasureParams, lam, time_in, switches_from, dw_by_regime):
    """log dQ/dP from occupation times, switch counts and Brownian increments per regime."""
    (th0, th1), (ps0, ps1) = mp.theta, mp.psi
    lam0, lam1 = lam
    log_theta = (
        (1 - th0) * lam0 * time_in[0]
        + (1 - th1) * lam1 * time_in[1]
        + switches_from[0] * math.log(th0)
        + switches_from[1] * math.log(th1)
    )
    log_psi = ps0 * dw_by_regime[0] + ps1 * dw_by_regime[1] - 0.5 * (ps0**2 * time_in[0] + ps1**2 * time_in[1])
    return log_theta + log_psi


def radon_nikodym_on_path(mp: MeasureParams, model: ModelSpec, path: RatePath) -> float:
    """Density ``L_T = L_T^psi * L_T^theta`` evaluated on one physical path.

    ``L^psi = exp(int psi dW - 1/2 int psi^2 ds)`` so that ``W - int psi ds`` is
    a Brownian motion under Q, matching the pricing drift ``mu + sigma psi``.
    All integrals are exact sums over the piecewise-constant regime segments.
    """
    if model.measure != "P" or path.measure != "P":
        raise InvalidStateError("the density is evaluated on physical-measure models and paths")
    dt = np.diff(path.times)
    seg = path.regimes[:-1]
    if path.wiener_increments is None:
        if model.kind.diffusive and not mp.psi == (0.0, 0.0):
            raise InvalidArgumentError("diffusive model path carries no Wiener increments")
        dw = np.zeros_like(dt)
    else:
        dw = path.wiener_increments
    time_in = np.array([dt[seg == 0].sum(), dt[seg == 1].sum()])
    dw_by_regime = np.array([dw[seg == 0].sum(), dw[seg == 1].sum()])
    pre = path.pre_switch_regimes()
    switches_from = np.array([np.count_nonzero(pre == 0), np.count_nonzero(pre == 1)])
    return float(np.exp(_log_density(mp, model.lam, time_in, switches_from, dw_by_regime)))


def radon_nikodym(mp: MeasureParams, model: ModelSpec, ensemble: Ensemble) -> np.ndarray:
    """Vectorised ``L_T`` for every path of a physical-measure ensemble."""
    if model.measure != "P" or ensemble.measure != "P":
        raise InvalidStateError("the density is evaluated on physical-measure models and paths")
    return np.exp(_log_density(mp, model.lam, ensemble.time_in, ensemble.switches_from, ensemble.dw_by_regime))
