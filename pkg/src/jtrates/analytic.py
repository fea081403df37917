"""Bond prices and forward rates under the unbiased expectation hypothesis.

The instantaneous forward rate is taken to be the expected future short rate,
and the bond price is ``exp(-int_t^T f(t, s) ds)``.  Both model families
integrate in closed form: an affine price ``exp(r C + D_i)`` for Merton kinds
and ``exp(-r [G + E_i H])`` for Dothan kinds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import exprel

from .errors import InvalidArgumentError, InvalidStateError, UnsupportedModelError
from .models import ModelSpec, expected_future_rate

# relative size of (alpha^2 - D) below which the printed G/H quotients are
# replaced by their exponential-split form
SINGULAR_TOL = 1e-10


def _tau(t: float, T: float) -> float:
    tau = float(T) - float(t)
    if not math.isfinite(tau) or tau < 0:
        raise InvalidArgumentError(f"need T >= t, got t={t}, T={T}")
    return tau


def _require_q(model: ModelSpec):
    if model.measure != "Q":
        raise InvalidStateError("pricing requires a Q-tagged model; use to_risk_neutral first")


@dataclass(frozen=True)
class AffineCoeffs:
    """``log F_i = r C + D_i`` for the Merton family."""

    C: float
    D0: float
    D1: float

    def D(self, i: int) -> float:
        return self.D0 if i == 0 else self.D1


@dataclass(frozen=True)
class DothanCoeffs:
    """``log F_i = -r (G + E_i H)`` for the Dothan family.

    ``alpha`` is the exponential rate of the integrand (shifted by
    ``sigma^2 / 2`` in the diffusive case) and ``disc`` the discriminant ``D``.
    """

    G: float
    H: float
    E0: float
    E1: float
    alpha: float
    disc: float
    tilde: bool

    def E(self, i: int) -> float:
        return self.E0 if i == 0 else self.E1

    def exponent(self, i: int) -> float:
        """``G + E_i H``, the integral of the expected relative rate."""
        return self.G + self.E(i) * self.H


def affine_coefficients(model: ModelSpec, t: float, T: float) -> AffineCoeffs:
    """``C = -(T - t)`` and ``D_i = -int_t^T m_i(s - t) ds`` with ``d_i`` from the Q drift."""
    if model.kind.dothan:
        raise UnsupportedModelError("affine coefficients exist for Merton kinds only")
    _require_q(model)
    tau = _tau(t, T)
    lam0, lam1 = model.lam
    two_lam = lam0 + lam1
    d0 = model.drift[0] + lam0 * model.eta[0]
    d1 = model.drift[1] + lam1 * model.eta[1]
    x = two_lam * tau
    # (2 lam tau + e^{-2 lam tau} - 1) / (2 lam)^2, cancellation-free for small tau
    transient = (x + math.expm1(-x)) / two_lam**2 if x > 1e-4 else tau * tau * (0.5 - x / 6 + x * x / 24)
    trend = (lam1 * d0 + lam0 * d1) * tau * tau / 2
    D0 = -(trend + lam0 * (d0 - d1) * transient) / two_lam
    D1 = -(trend - lam1 * (d0 - d1) * transient) / two_lam
    return AffineCoeffs(C=-tau, D0=D0, D1=D1)


def _exp_integral(k: float, tau: float) -> float:
    """``int_0^tau exp(k s) ds``."""
    return tau * float(exprel(k * tau))


def dothan_coefficients(model: ModelSpec, t: float, T: float) -> DothanCoeffs:
    """Coefficients of the Dothan-family expectation price.

    ``G = int_0^tau e^{alpha s} cosh(s sqrt(D)) ds`` and
    ``H = int_0^tau e^{alpha s} sinh(s sqrt(D)) ds`` with
    ``alpha = zeta - lam (+ sigma^2 / 2)``.  The quotients over
    ``alpha^2 - D`` have a removable singularity; near it the equivalent
    split ``G, H = (I(alpha + sqrt D) +/- I(alpha - sqrt D)) / 2`` is used.
    """
    if not model.kind.dothan:
        raise UnsupportedModelError("G/E/H coefficients exist for Dothan kinds only")
    _require_q(model)
    if model.sigma[0] != model.sigma[1]:
        raise UnsupportedModelError("closed form for the diffusive Dothan model needs sigma0 == sigma1")
    tau = _tau(t, T)
    half_s2 = 0.5 * model.sigma[0] ** 2
    p = model.telegraph_params()  # drifts already carry -sigma^2/2 and the psi shift
    lam0, lam1 = p.lam
    zeta = 0.5 * (p.c0 + p.c1)
    chi = 0.5 * (p.c0 - p.c1)
    nu = 0.5 * (lam0 - lam1)
    lam = 0.5 * (lam0 + lam1)
    disc = (chi - nu) ** 2 + lam0 * lam1 * (1 + model.eta[0]) * (1 + model.eta[1])
    root = math.sqrt(disc)
    alpha = zeta - lam + half_s2
    E0 = (chi - nu + lam0 * (1 + model.eta[0])) / root
    E1 = -(chi - nu - lam1 * (1 + model.eta[1])) / root

    denom = alpha * alpha - disc
    if abs(denom) > SINGULAR_TOL * max(1.0, alpha * alpha, disc):
        grow = math.exp(tau * alpha)
        ch, sh = math.cosh(tau * root), math.sinh(tau * root)
        G = (grow * (alpha * ch - root * sh) - alpha) / denom
        H = (grow * (alpha * sh - root * ch) + root) / denom
    else:
        up, down = _exp_integral(alpha + root, tau), _exp_integral(alpha - root, tau)
        G = 0.5 * (up + down)
        H = 0.5 * (up - down)
    return DothanCoeffs(G=G, H=H, E0=E0, E1=E1, alpha=alpha, disc=disc, tilde=model.kind.diffusive)


def forward_rate(model: ModelSpec, i: int, r: float, t: float, T: float) -> float:
    """Expectation-hypothesis instantaneous forward rate ``f_i(t, T, r)``."""
    _require_q(model)
    return float(expected_future_rate(model, i, r, _tau(t, T)))


def log_bond_price_expectation(model: ModelSpec, i: int, r: float, t: float, T: float) -> float:
    if i not in (0, 1):
        raise InvalidArgumentError(f"regime must be 0 or 1, got {i!r}")
    if model.kind.dothan:
        return -r * dothan_coefficients(model, t, T).exponent(i)
    co = affine_coefficients(model, t, T)
    return r * co.C + co.D(i)


def bond_price_expectation(model: ModelSpec, i: int, r: float, t: float, T: float) -> float:
    """Zero-coupon bond price ``exp(-int_t^T f ds)`` from the expectation hypothesis."""
    return math.exp(log_bond_price_expectation(model, i, r, t, T))


def bond_prices_expectation(model: ModelSpec, i: int, r: float, maturities) -> np.ndarray:
    """Vector of expectation prices at ``t = 0`` for each maturity."""
    return np.array([bond_price_expectation(model, i, r, 0.0, T) for T in np.atleast_1d(maturities)])
