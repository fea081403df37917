import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jtrates.errors import DegenerateParametersWarning, InvalidArgumentError, MgfOverflowError
from jtrates.rng import mean_and_stderr, substream
from jtrates.telegraph import (
    TelegraphParams,
    log_mgf_jt,
    martingale_stats,
    mean_jt,
    mgf_jt,
    sample_occupation,
    sample_path,
)

finite = st.floats(-0.5, 0.5, allow_nan=False)
jump = st.floats(-0.5, 0.5, allow_nan=False).filter(lambda h: abs(h) > 1e-3)
rate = st.floats(0.1, 5.0)


@st.composite
def params_st(draw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateParametersWarning)
        return TelegraphParams(draw(finite), draw(finite), draw(jump), draw(jump), draw(rate), draw(rate))


class TestParams:
    def test_rejects_nonpositive_intensity(self):
        with pytest.raises(InvalidArgumentError):
            TelegraphParams(0.0, 1.0, 0.1, 0.1, 0.0, 1.0)

    def test_rejects_nan(self):
        with pytest.raises(InvalidArgumentError):
            TelegraphParams(math.nan, 1.0, 0.1, 0.1, 1.0, 1.0)

    def test_degenerate_warns(self):
        with pytest.warns(DegenerateParametersWarning):
            TelegraphParams(0.1, 0.1, 0.1, 0.1, 1.0, 1.0)

    def test_swapped_twice_is_identity(self, telegraph):
        assert telegraph.swapped().swapped() == telegraph


class TestMean:
    def test_zero_at_origin(self, telegraph):
        assert mean_jt(telegraph, 0, 0.0) == 0.0
        assert mean_jt(telegraph, 1, 0.0) == 0.0

    def test_initial_slope_is_drift_plus_expected_jump(self, telegraph):
        h = 1e-7
        for i in (0, 1):
            slope = mean_jt(telegraph, i, h) / h
            assert slope == pytest.approx(telegraph.c[i] + telegraph.lam[i] * telegraph.h[i], rel=1e-5)

    def test_vectorised(self, telegraph):
        t = np.array([0.0, 0.5, 1.0])
        out = mean_jt(telegraph, 0, t)
        assert out.shape == (3,)
        assert out[2] == mean_jt(telegraph, 0, 1.0)

    def test_negative_time_rejected(self, telegraph):
        with pytest.raises(InvalidArgumentError):
            mean_jt(telegraph, 0, -1.0)

    def test_bad_regime_rejected(self, telegraph):
        with pytest.raises(InvalidArgumentError):
            mean_jt(telegraph, 2, 1.0)

    def test_monte_carlo_oracle(self, telegraph):
        occ = sample_occupation(telegraph.lam, 0, 1.0, 1_000_000, substream(11))
        mean, err = mean_and_stderr(occ.telegraph_value(telegraph))
        assert abs(mean - mean_jt(telegraph, 0, 1.0)) < 3 * err

    @given(params_st(), st.floats(0.0, 5.0))
    @settings(max_examples=60, deadline=None)
    def test_relabel_symmetry(self, p, t):
        assert mean_jt(p, 0, t) == pytest.approx(mean_jt(p.swapped(), 1, t), rel=1e-12, abs=1e-15)


class TestMgf:
    @given(params_st(), st.integers(0, 1), st.floats(0.0, 10.0))
    @settings(max_examples=80, deadline=None)
    def test_unity_at_zero(self, p, i, t):
        assert mgf_jt(p, i, 0.0, t) == pytest.approx(1.0, rel=1e-12)

    @given(params_st(), st.integers(0, 1), st.floats(0.01, 3.0))
    @settings(max_examples=80, deadline=None)
    def test_derivative_at_zero_is_mean(self, p, i, t):
        h = 1e-5
        slope = (mgf_jt(p, i, h, t) - mgf_jt(p, i, -h, t)) / (2 * h)
        m = mean_jt(p, i, t)
        assert abs(slope - m) <= 1e-6 * max(abs(m), 1e-2)

    @given(params_st(), st.floats(-2.0, 2.0), st.floats(0.0, 3.0))
    @settings(max_examples=60, deadline=None)
    def test_relabel_symmetry(self, p, z, t):
        assert log_mgf_jt(p, 0, z, t) == pytest.approx(log_mgf_jt(p.swapped(), 1, z, t), rel=1e-10, abs=1e-12)

    def test_time_zero(self, telegraph):
        assert mgf_jt(telegraph, 1, 3.0, 0.0) == 1.0

    def test_broadcast(self, telegraph):
        z = np.array([[0.0], [1.0]])
        t = np.array([0.5, 1.0, 2.0])
        assert mgf_jt(telegraph, 0, z, t).shape == (2, 3)

    def test_monte_carlo_oracle(self, telegraph):
        z = 20.0
        occ = sample_occupation(telegraph.lam, 1, 1.0, 400_000, substream(5))
        mean, err = mean_and_stderr(np.exp(z * occ.telegraph_value(telegraph)))
        assert abs(mean - mgf_jt(telegraph, 1, z, 1.0)) < 3 * err

    def test_large_time_stays_finite_in_log_space(self, telegraph):
        assert math.isfinite(log_mgf_jt(telegraph, 0, 1.0, 1e4))

    def test_overflow_raises(self, telegraph):
        with pytest.raises(MgfOverflowError):
            mgf_jt(telegraph, 0, 500.0, 1e4)


class TestPaths:
    def test_path_consistency(self, telegraph):
        path = sample_path(telegraph, 0, 5.0, substream(3))
        assert np.all(np.diff(path.switch_times) > 0)
        assert path.regimes[0] == 0
        assert np.all(np.abs(np.diff(path.regimes)) == 1)
        assert path.count_at(5.0) == path.n_switches
        assert path.count_at(0.0) == 0

    def test_path_value_matches_occupation_formula(self, telegraph):
        path = sample_path(telegraph, 1, 3.0, substream(8))
        edges = np.concatenate([[0.0], path.switch_times, [3.0]])
        durations = np.diff(edges)
        expected = sum(telegraph.c[r] * d for r, d in zip(path.regimes, durations))
        expected += sum(telegraph.h[r] for r in path.regimes[:-1])
        assert path.y_horizon == pytest.approx(expected, abs=1e-12)

    def test_zero_horizon(self, telegraph):
        path = sample_path(telegraph, 0, 0.0, substream(1))
        assert path.n_switches == 0 and path.y_horizon == 0.0

    def test_occupation_times_sum_to_horizon(self):
        occ = sample_occupation((1.0, 2.0), 0, 2.0, 1000, substream(2))
        assert np.allclose(occ.time_in.sum(axis=0), 2.0)
        # switches alternate, so counts out of each regime differ by at most one
        assert np.all(np.abs(occ.switches_from[0] - occ.switches_from[1]) <= 1)


class TestMartingales:
    def test_means_within_three_stderr(self, telegraph):
        summary = martingale_stats(telegraph, 0, 1.0, 200_000, seed=17, theta=(0.5, 2.0))
        for name, z in summary.z_scores().items():
            assert abs(z) < 3, name

    def test_rejects_jump_below_minus_one(self):
        p = TelegraphParams(0.0, 0.1, -1.5, 0.1, 1.0, 1.0)
        with pytest.raises(InvalidArgumentError):
            martingale_stats(p, 0, 1.0, 100, seed=1)

    def test_rejects_bad_theta(self, telegraph):
        with pytest.raises(InvalidArgumentError):
            martingale_stats(telegraph, 0, 1.0, 100, seed=1, theta=(0.0, 1.0))
