import numpy as np
import pytest

from jtrates.errors import DegenerateParametersWarning, InvalidArgumentError, InvalidStateError, UnsupportedModelError
from jtrates.models import ModelKind, ModelSpec, expected_future_rate, simulate_ensemble, simulate_rate
from jtrates.rng import mean_and_stderr, substream
from jtrates.telegraph import mean_jt, mgf_jt


class TestModelKind:
    def test_parse_is_case_insensitive(self):
        assert ModelKind.parse("JTD_Dothan") is ModelKind.JTD_DOTHAN

    def test_unknown_kind_names_it(self):
        with pytest.raises(InvalidArgumentError, match="cir"):
            ModelKind.parse("cir")

    def test_flags(self):
        assert ModelKind.JTD_MERTON.diffusive and not ModelKind.JTD_MERTON.dothan
        assert ModelKind.JT_DOTHAN.dothan and not ModelKind.JT_DOTHAN.diffusive


class TestModelSpec:
    def test_sigma_forbidden_without_diffusion(self):
        with pytest.raises(InvalidArgumentError):
            ModelSpec("jt_merton", mu=(0, 0.1), eta=(0.1, 0.1), lam=(1, 1), sigma=(0.1, 0.0))

    def test_dothan_jump_floor(self):
        with pytest.raises(InvalidArgumentError):
            ModelSpec("jt_dothan", mu=(0, 0.1), eta=(-1.0, 0.1), lam=(1, 1))

    def test_nonpositive_intensity(self):
        with pytest.raises(InvalidArgumentError):
            ModelSpec("jt_merton", mu=(0, 0.1), eta=(0.1, 0.1), lam=(0, 1))

    def test_zero_jump_warns(self):
        with pytest.warns(DegenerateParametersWarning):
            ModelSpec("jt_merton", mu=(0, 0.1), eta=(0.0, 0.1), lam=(1, 1))

    def test_dothan_telegraph_reduction(self, dothan_diffusive):
        p = dothan_diffusive.telegraph_params()
        assert p.c0 == pytest.approx(-0.1 + 0.4 - 0.08)
        assert p.h1 == pytest.approx(np.log(0.8))


class TestExpectedFutureRate:
    def test_merton_is_rate_plus_mean(self, merton):
        assert expected_future_rate(merton, 0, 0.05, 1.0) == pytest.approx(0.05 + mean_jt(merton.telegraph_params(), 0, 1.0))

    def test_dothan_is_rate_times_mgf(self, dothan):
        assert expected_future_rate(dothan, 1, 0.05, 1.0) == pytest.approx(0.05 * mgf_jt(dothan.telegraph_params(), 1, 1.0, 1.0))

    def test_requires_q(self, merton):
        from dataclasses import replace

        with pytest.raises(InvalidStateError):
            expected_future_rate(replace(merton, measure="P"), 0, 0.05, 1.0)

    def test_unequal_dothan_vols_unsupported(self):
        m = ModelSpec("jtd_dothan", mu=(-0.1, 0.25), eta=(0.1, -0.2), lam=(1, 2), sigma=(0.1, 0.2))
        with pytest.raises(UnsupportedModelError):
            expected_future_rate(m, 0, 0.05, 1.0)

    @pytest.mark.parametrize("table", [1, 2, 3, 4])
    @pytest.mark.parametrize("tau", [1 / 12, 1.0])
    def test_monte_carlo_oracle(self, table, tau):
        from jtrates.tables import TABLES

        model = TABLES[table].model
        ens = simulate_ensemble(model, 0.05, 0, tau, 200_000, substream(table, int(tau * 12)))
        mean, err = mean_and_stderr(ens.rate)
        assert abs(mean - expected_future_rate(model, 0, 0.05, tau)) < 3 * err


class TestSimulateRate:
    def test_exact_segments_merton(self, merton):
        path = simulate_rate(merton, 0.05, 0, 2.0, substream(4))
        assert path.times[0] == 0.0 and path.times[-1] == 2.0
        for k in range(path.times.size - 1):
            dt = path.times[k + 1] - path.times[k]
            reg = path.regimes[k]
            pre = path.rates[k] + merton.mu[reg] * dt
            expected = pre + merton.eta[reg] if (k + 1) in set(path.switch_index) else pre
            assert path.rates[k + 1] == pytest.approx(expected, abs=1e-15)

    def test_dothan_rates_stay_positive(self, dothan_diffusive):
        path = simulate_rate(dothan_diffusive, 0.05, 1, 3.0, substream(6))
        assert np.all(path.rates > 0)
        assert np.all(np.diff(path.integral) > 0)

    def test_diffusive_grid_contains_switches(self, merton_diffusive):
        path = simulate_rate(merton_diffusive, 0.05, 0, 1.0, substream(7), step=0.01)
        assert np.max(np.diff(path.times)) <= 0.01 + 1e-12
        assert path.wiener_increments.size == path.times.size - 1

    def test_zero_horizon(self, merton):
        path = simulate_rate(merton, 0.05, 0, 0.0, substream(1))
        assert path.times.tolist() == [0.0]

    def test_deterministic_integral(self, quiet_degenerate):
        m = ModelSpec("jt_merton", mu=(0.02, 0.02), eta=(0.0, 0.0), lam=(1, 1))
        path = simulate_rate(m, 0.05, 0, 1.0, substream(2))
        assert path.integral[-1] == pytest.approx(0.05 + 0.01, abs=1e-14)

    def test_bad_regime(self, merton):
        with pytest.raises(InvalidArgumentError):
            simulate_rate(merton, 0.05, 3, 1.0, substream(1))


class TestEnsemble:
    def test_checkpoints_recorded(self, dothan):
        ens = simulate_ensemble(dothan, 0.05, 0, 1.0, 1000, substream(3), checkpoints=[0.0, 0.5, 1.0])
        assert ens.checkpoint_integral.shape == (3, 1000)
        assert np.all(ens.checkpoint_integral[0] == 0)
        assert np.array_equal(ens.checkpoint_integral[2], ens.integral)

    def test_matches_single_paths_in_law(self, dothan):
        ens = simulate_ensemble(dothan, 0.05, 1, 1.0, 50_000, substream(12))
        single = np.array([simulate_rate(dothan, 0.05, 1, 1.0, substream(13, k)).integral[-1] for k in range(5000)])
        m1, e1 = mean_and_stderr(ens.integral)
        m2, e2 = mean_and_stderr(single)
        assert abs(m1 - m2) < 3 * np.hypot(e1, e2)

    def test_antithetic_requires_diffusion(self, merton):
        with pytest.raises(InvalidArgumentError):
            simulate_ensemble(merton, 0.05, 0, 1.0, 10, substream(1), antithetic=True)

    def test_antithetic_mirrors_noise(self, merton_diffusive):
        ens = simulate_ensemble(merton_diffusive, 0.05, 0, 1.0, 10, substream(1), antithetic=True)
        assert np.allclose(ens.dw_by_regime[:, :5], -ens.dw_by_regime[:, 5:])
        assert np.array_equal(ens.switches_from[:, :5], ens.switches_from[:, 5:])

    def test_occupation_sums(self, merton_diffusive):
        ens = simulate_ensemble(merton_diffusive, 0.05, 0, 1.5, 500, substream(5))
        assert np.allclose(ens.time_in.sum(axis=0), 1.5)
