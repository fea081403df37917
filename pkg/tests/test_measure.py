import math

import numpy as np
import pytest

from jtrates.errors import InvalidArgumentError, InvalidStateError
from jtrates.measure import MeasureParams, radon_nikodym, radon_nikodym_on_path, to_risk_neutral
from jtrates.models import ModelSpec, simulate_ensemble, simulate_rate
from jtrates.rng import mean_and_stderr, substream


def physical(kind="jtd_merton", **mp):
    return ModelSpec(
        kind,
        mu=(-0.02, 0.05),
        eta=(0.01, -0.02),
        lam=(1.0, 2.0),
        sigma=(0.02, 0.06) if kind.startswith("jtd") else (0.0, 0.0),
        measure="P",
        measure_params=MeasureParams(**mp),
    )


class TestMeasureParams:
    def test_defaults_are_identity(self):
        assert MeasureParams().is_identity

    def test_rejects_nonpositive_theta(self):
        with pytest.raises(InvalidArgumentError):
            MeasureParams(theta0=0.0)

    def test_rejects_nan_psi(self):
        with pytest.raises(InvalidArgumentError):
            MeasureParams(psi0=math.nan)


class TestRiskNeutral:
    def test_scales_intensities(self):
        q = to_risk_neutral(physical(theta0=0.5, theta1=2.0))
        assert q.lam == (0.5, 4.0)
        assert q.measure == "Q"

    def test_drift_shift(self):
        q = to_risk_neutral(physical(psi0=0.5, psi1=1.0))
        assert q.drift == pytest.approx((-0.02 + 0.02 * 0.5, 0.05 + 0.06 * 1.0))

    def test_twice_is_an_error(self):
        q = to_risk_neutral(physical())
        with pytest.raises(InvalidStateError):
            to_risk_neutral(q)


class TestDensity:
    def test_identity_measure_gives_unit_density(self):
        model = physical()
        path = simulate_rate(model, 0.05, 0, 1.0, substream(1))
        assert radon_nikodym_on_path(MeasureParams(), model, path) == 1.0

    def test_requires_physical_model(self):
        q = to_risk_neutral(physical())
        path = simulate_rate(q, 0.05, 0, 1.0, substream(1))
        with pytest.raises(InvalidStateError):
            radon_nikodym_on_path(MeasureParams(), q, path)

    def test_unit_mean(self):
        mp = MeasureParams(theta0=0.5, theta1=2.0, psi0=0.5, psi1=-1.0)
        model = physical(**mp.__dict__)
        ens = simulate_ensemble(model, 0.05, 0, 1.0, 200_000, substream(4), step=1 / 32)
        mean, err = mean_and_stderr(radon_nikodym(mp, model, ens))
        assert abs(mean - 1.0) < 3 * err

    def test_path_and_ensemble_agree_in_law(self):
        mp = MeasureParams(theta0=0.5, theta1=2.0, psi0=0.5, psi1=-1.0)
        model = physical(**mp.__dict__)
        values = [radon_nikodym_on_path(mp, model, simulate_rate(model, 0.05, 1, 1.0, substream(9, k), 1 / 16)) for k in range(4000)]
        mean, err = mean_and_stderr(np.array(values))
        assert abs(mean - 1.0) < 3 * err

    def test_reweighting_reproduces_pricing_bond(self):
        """E_P[L exp(-int r)] equals the bond price simulated directly under Q."""
        mp = MeasureParams(theta0=0.5, theta1=2.0, psi0=0.5, psi1=1.0)
        model = physical(**mp.__dict__)
        ens_p = simulate_ensemble(model, 0.05, 0, 1.0, 200_000, substream(21), step=1 / 32)
        weighted = radon_nikodym(mp, model, ens_p) * np.exp(-ens_p.integral)
        ens_q = simulate_ensemble(to_risk_neutral(model), 0.05, 0, 1.0, 200_000, substream(22), step=1 / 32)
        m_p, e_p = mean_and_stderr(weighted)
        m_q, e_q = mean_and_stderr(np.exp(-ens_q.integral))
        assert abs(m_p - m_q) < 3 * math.hypot(e_p, e_q)
