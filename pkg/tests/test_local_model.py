import numpy as np
import pytest

from conftest import quick_config
from tmax_spacetime.exceptions import DataValidationError, SiteMismatchError
from tmax_spacetime.local_model import (
    OVERLAP_COLUMNS,
    compare_local_vs_full,
    fit_local,
    fit_local_all,
    interval_overlap,
    local_config,
    local_state_at,
)
from tmax_spacetime.models.chain import pool_chains
from tmax_spacetime.models.design import ScalingPolicy
from tmax_spacetime.sampler import run_chains


class TestIntervalOverlap:
    @pytest.mark.parametrize("a, b, expected", [
        ((0.0, 2.0), (0.0, 2.0), 1.0),
        ((0.0, 1.0), (2.0, 3.0), 0.0),
        ((0.0, 2.0), (1.0, 3.0), 1.0 / 3.0),
        ((0.0, 4.0), (1.0, 2.0), 0.25),
        ((1.0, 1.0), (1.0, 1.0), 1.0),
    ])
    def test_ratio_of_intersection_to_union(self, a, b, expected):
        assert interval_overlap(*a, *b) == pytest.approx(expected)

    def test_symmetric(self):
        assert interval_overlap(0.0, 3.0, 2.0, 5.0) == interval_overlap(2.0, 5.0, 0.0, 3.0)


def test_local_config_is_single_site_model():
    config = local_config(quick_config(variant="M4", pin_rho_psi_zero=False))
    assert config.variant == "M0"
    assert config.pin_rho_psi_zero
    assert config.scaling == ScalingPolicy.NONE


class TestFitLocal:
    def test_one_site_fit(self, panel):
        chains = fit_local(panel, "S02", quick_config(chains=1, iterations=12, burn_in=4, thin=2))
        output = chains[0]
        assert output.site_ids == ["S02"]
        assert output.variant.code == "M0"
        state = local_state_at(output, 0)
        assert -1.0 < state.rho_y < 1.0
        assert state.sigma2_eps > 0
        assert state.psi[0] == 0.0

    def test_missing_days_are_rejected(self, gappy_panel):
        with pytest.raises(DataValidationError):
            fit_local(gappy_panel, "S02", quick_config(chains=1))

    def test_incomplete_sites_are_skipped(self, gappy_panel):
        fits = fit_local_all(gappy_panel, quick_config(chains=1, iterations=8, burn_in=2, thin=2), jobs=1)
        assert sorted(fits) == ["S01", "S03"]

    def test_state_needs_a_single_site(self, panel):
        full = run_chains(panel, quick_config(chains=1, iterations=6, burn_in=2, thin=2))[0]
        with pytest.raises(ValueError):
            local_state_at(full, 0)


class TestComparison:
    @pytest.fixture
    def config(self):
        return quick_config(chains=1, iterations=16, burn_in=6, thin=2)

    def test_overlap_table(self, panel, config):
        local = fit_local_all(panel, config, jobs=1)
        full = pool_chains(run_chains(panel, config))
        table = compare_local_vs_full(local, full)
        assert list(table.columns) == OVERLAP_COLUMNS
        assert len(table) == 3 * panel.n_sites
        assert set(table["parameter"]) == {"alpha", "rho_y", "sigma_eps"}
        assert table["overlap"].between(0.0, 1.0).all()
        assert np.all(table["local_lower"] <= table["local_upper"])

    def test_different_sites_are_rejected(self, panel, config):
        local = fit_local_all(panel, config, sites=["S01"], jobs=1)
        full = pool_chains(run_chains(panel, config))
        with pytest.raises(SiteMismatchError) as info:
            compare_local_vs_full(local, full)
        assert info.value.details["missing_local"] == ["S02", "S03"]
