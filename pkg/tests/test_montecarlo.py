import math
from dataclasses import replace

import numpy as np
import pytest

from jtrates.config import SolverConfig
from jtrates.errors import ConfigError, InvalidArgumentError, InvalidStateError
from jtrates.models import ModelSpec
from jtrates.montecarlo import (
    ConvexityReport,
    convexity_adjustment,
    default_maturity_grid,
    price_bond_mc,
    price_bonds_mc,
)
from jtrates.pde import price_bond_pde
from jtrates.tables import TABLES

SMALL = SolverConfig(mc_paths=100_000)


class TestPriceBondMc:
    def test_deterministic_model(self, quiet_degenerate):
        m = ModelSpec("jt_merton", mu=(0.03, 0.03), eta=(0.0, 0.0), lam=(1.0, 2.0))
        est = price_bond_mc(m, 0, 0.05, 1.0, n_paths=1000)
        assert est.estimate == pytest.approx(math.exp(-0.05 - 0.03 / 2), rel=1e-13)
        assert est.stderr < 1e-15

    def test_zero_maturity(self, merton):
        est = price_bond_mc(merton, 0, 0.05, 0.0, n_paths=100)
        assert est.estimate == 1.0 and est.stderr == 0.0

    def test_requires_pricing_measure(self, merton):
        with pytest.raises(InvalidStateError):
            price_bond_mc(replace(merton, measure="P"), 0, 0.05, 1.0, n_paths=10)

    def test_too_few_paths(self, merton):
        with pytest.raises(InvalidArgumentError):
            price_bond_mc(merton, 0, 0.05, 1.0, n_paths=1)

    def test_merton_against_ode(self, merton):
        est = price_bond_mc(merton, 0, 0.05, 1.0, n_paths=200_000, seed=3)
        assert abs(est.z_score(0.954317)) < 3

    def test_diffusive_dothan_against_fd(self, dothan_diffusive):
        est = price_bond_mc(dothan_diffusive, 1, 0.05, 1.0, n_paths=100_000, cfg=SolverConfig(mc_step=1 / 64), seed=4)
        assert abs(est.estimate - 0.943588) < max(3 * est.stderr, 3e-4)

    def test_several_maturities_share_paths(self, dothan):
        forward = price_bonds_mc(dothan, 0, 0.05, [0.25, 1.0], n_paths=20_000, seed=9)
        backward = price_bonds_mc(dothan, 0, 0.05, [1.0, 0.25], n_paths=20_000, seed=9)
        assert forward == backward[::-1]
        assert forward[0].estimate > forward[1].estimate

    def test_reproducible_across_workers(self, merton_diffusive):
        cfg = SolverConfig(mc_block=4096, mc_step=1 / 32)
        serial = price_bond_mc(merton_diffusive, 1, 0.05, 1.0, 20_000, cfg, seed=5)
        threaded = price_bond_mc(merton_diffusive, 1, 0.05, 1.0, 20_000, replace(cfg, workers=3), seed=5)
        assert serial == threaded

    def test_stderr_scales_as_inverse_root(self, dothan):
        small = price_bond_mc(dothan, 0, 0.05, 1.0, 100_000, seed=1)
        large = price_bond_mc(dothan, 0, 0.05, 1.0, 400_000, seed=2)
        assert small.stderr / large.stderr == pytest.approx(2.0, rel=0.1)

    def test_antithetic(self, merton_diffusive):
        cfg = SolverConfig(antithetic=True, mc_step=1 / 32)
        est = price_bond_mc(merton_diffusive, 0, 0.05, 1.0, 100_000, cfg, seed=8)
        ref = price_bond_pde(merton_diffusive, 0, 0.05, 1.0)
        assert abs(est.z_score(ref)) < 3

    def test_antithetic_needs_even_paths(self, merton_diffusive):
        with pytest.raises(ConfigError):
            price_bond_mc(merton_diffusive, 0, 0.05, 1.0, 11, SolverConfig(antithetic=True))


class TestConvexity:
    def test_default_grid(self):
        grid = default_maturity_grid(1.0)
        assert grid.size == 41 and grid[0] == pytest.approx(1 / 40) and grid[-1] == 1.0

    def test_deterministic_model_has_no_adjustment(self, quiet_degenerate):
        m = ModelSpec("jt_merton", mu=(0.01, 0.01), eta=(0.0, 0.0), lam=(1.0, 2.0))
        report = convexity_adjustment(m, 0, 0.05)
        assert np.max(np.abs(report.adjustment)) <= 1e-8

    @pytest.mark.parametrize("number", [1, 2, 3, 4])
    def test_integrated_adjustment_identity(self, number):
        report = convexity_adjustment(TABLES[number].model, 1, 0.05, cfg=SolverConfig(fd_nx=500, fd_nt=500))
        assert abs(report.integrated_adjustment() - report.log_price_gap()) <= 2e-6

    def test_short_end_vanishes(self, merton):
        report = convexity_adjustment(merton, 0, 0.05)
        assert abs(report.adjustment[0]) <= 1e-5

    def test_price_gaps_match_tables(self, merton, merton_diffusive):
        r1 = convexity_adjustment(merton, 1, 0.05)
        r3 = convexity_adjustment(merton_diffusive, 1, 0.05)
        gap1 = math.exp(r1.log_price_impl[-1]) - math.exp(r1.log_price_exp[-1])
        gap3 = math.exp(r3.log_price_impl[-1]) - math.exp(r3.log_price_exp[-1])
        assert gap1 == pytest.approx(1.37e-4, abs=2e-5)
        assert gap3 == pytest.approx(6.83e-4, abs=5e-5)

    def test_monte_carlo_method(self, merton):
        pde = convexity_adjustment(merton, 1, 0.05)
        mc = convexity_adjustment(merton, 1, 0.05, method="mc", cfg=SMALL, seed=2)
        assert np.all(mc.stderr > 0)
        assert abs(mc.adjustment[-1] - pde.adjustment[-1]) < 3 * mc.stderr[-1]

    def test_grid_too_fine(self, merton):
        with pytest.raises(ConfigError):
            convexity_adjustment(merton, 0, 0.05, [0.5, 0.50005, 1.0])

    def test_grid_not_increasing(self, merton):
        with pytest.raises(InvalidArgumentError):
            convexity_adjustment(merton, 0, 0.05, [0.5, 0.25])

    def test_csv(self, merton):
        report = convexity_adjustment(merton, 0, 0.05, [0.25, 0.5, 1.0])
        assert isinstance(report, ConvexityReport)
        lines = report.to_csv().splitlines()
        assert lines[0] == "maturity,f_exp,f_impl,adjustment,stderr"
        assert len(lines) == 4
