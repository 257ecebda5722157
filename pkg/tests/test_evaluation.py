import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import quick_config
from tmax_spacetime.evaluation import (
    change_summary,
    change_table,
    crps_ensemble,
    loocv_frame,
    loocv_summary,
    run_fold,
    run_loocv,
    score_cells,
    score_site,
)
from tmax_spacetime.exceptions import DataValidationError, ScoringError
from tmax_spacetime.models import ModelVariant, PanelDataset, PredictiveSamples, SiteMeta
from tmax_spacetime.models.variant import STANDARD_LATTICE, FieldName
from tmax_spacetime.simulation import grid_sites, reference_spec, simulate_panel

SITE = SiteMeta(id="A", x=0.0, y=0.0, elevation=100.0)

finite = st.floats(min_value=-50, max_value=50, allow_nan=False, allow_infinity=False)


class TestCrps:
    def test_two_member_ensemble(self):
        assert crps_ensemble(np.array([[0.0], [2.0]]), np.array([1.0]))[0] == pytest.approx(0.5)

    def test_single_member_is_absolute_error(self):
        assert crps_ensemble(np.array([[3.0, -1.0]]), np.array([1.0, 1.0])).tolist() == [2.0, 2.0]

    def test_matches_the_double_sum(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(7, 3))
        y = rng.normal(size=3)
        direct = np.abs(x - y).mean(axis=0) - np.abs(x[:, None, :] - x[None, :, :]).sum(axis=(0, 1)) / (2 * 49)
        np.testing.assert_allclose(crps_ensemble(x, y), direct)

    @given(arrays(np.float64, (6, 4), elements=finite), arrays(np.float64, 4, elements=finite))
    def test_never_negative(self, x, y):
        assert np.all(crps_ensemble(x, y) >= -1e-9)


class TestScores:
    def test_single_replicate_crps_equals_mae(self):
        score = score_cells(np.array([[1.0, 4.0, 2.0]]), np.array([2.0, 2.0, 2.0]))
        assert score.crps == pytest.approx(score.mae)
        assert score.mae == pytest.approx(1.0)
        assert score.rmse == pytest.approx(np.sqrt(4.0 / 3.0))

    @settings(max_examples=50)
    @given(arrays(np.float64, (5, 8), elements=finite), arrays(np.float64, 8, elements=finite))
    def test_rmse_at_least_mae(self, replicates, truth):
        score = score_cells(replicates, truth)
        assert score.rmse >= score.mae - 1e-9
        assert 0.0 <= score.cvg <= 1.0

    def test_rejects_unobserved_truth(self):
        with pytest.raises(ValueError):
            score_cells(np.ones((2, 2)), np.array([1.0, np.nan]))

    def test_site_score_skips_day_one_and_missing(self):
        replicates = np.tile(np.arange(1.0, 5.0), (3, 2, 1))
        pred = PredictiveSamples(site=SITE, replicates=replicates, years=[1, 2], days=[1, 2, 3, 4])
        truth = np.tile(np.arange(1.0, 5.0), (2, 1))
        truth[1, 3] = np.nan
        score = score_site(pred, truth)
        assert score.n_cells == 5
        assert score.rmse == 0.0 and score.cvg == 1.0

    def test_site_with_only_day_one_observed(self):
        pred = PredictiveSamples(site=SITE, replicates=np.ones((3, 2, 4)), years=[1, 2], days=[1, 2, 3, 4])
        truth = np.full((2, 4), np.nan)
        truth[:, 0] = 20.0
        with pytest.raises(ScoringError) as info:
            score_site(pred, truth)
        assert info.value.details == {"site": "A"}


class TestChange:
    def test_observed_series(self):
        series = np.array([[20.0, 22.0], [21.0, 23.0], [24.0, 26.0], [25.0, 27.0]])
        summary = change_summary(series, (1, 2), (3, 4), site="A")
        assert summary.delta_mean == pytest.approx(4.0)
        assert summary.q_sd == pytest.approx(1.0)
        assert summary.delta_samples is None

    def test_calendar_years(self):
        series = np.array([[20.0, 22.0], [24.0, 27.0]])
        summary = change_summary(series, (1990, 1990), (1991, 1991), years=[1990, 1991])
        assert summary.delta_mean == pytest.approx(4.5)
        assert summary.q_sd == pytest.approx(np.std([24, 27], ddof=1) / np.std([20, 22], ddof=1))

    def test_predictive_replicates(self):
        rng = np.random.default_rng(1)
        replicates = rng.normal(size=(50, 4, 5)) + np.array([0.0, 0.0, 2.0, 2.0])[None, :, None]
        pred = PredictiveSamples(site=SITE, replicates=replicates, years=[1, 2, 3, 4], days=[1, 2, 3, 4, 5])
        summary = change_summary(pred, (1, 2), (3, 4))
        assert summary.site == "A"
        assert summary.delta_mean == pytest.approx(2.0, abs=0.3)
        assert summary.prob_positive > 0.95
        assert summary.delta_interval[0] < summary.delta_mean < summary.delta_interval[1]
        assert "delta_samples" not in summary.as_dict()

    def test_empty_window(self):
        with pytest.raises(DataValidationError):
            change_summary(np.ones((3, 2)), (5, 6), (1, 2))

    def test_table_uses_calendar_years(self, panel):
        dated = PanelDataset(sites=panel.sites, values=panel.values, first_year=2001)
        table = change_table(dated, (2001, 2002), (2003, 2004))
        assert table["site"].tolist() == ["S01", "S02", "S03"]
        first = dated.series(0)
        assert table.loc[0, "delta_mean"] == pytest.approx(first[2:].mean() - first[:2].mean())


class TestLoocv:
    def test_fold_is_reproducible(self, panel):
        config = quick_config(chains=1, iterations=16, burn_in=8, thin=2)
        first = run_fold(panel, config, ModelVariant.parse("M0"), 1)
        second = run_fold(panel, config, ModelVariant.parse("M0"), 1)
        assert first.ok and first == second
        assert first.site == "S02"
        assert first.n_cells == panel.n_years * (panel.n_days - 1)

    def test_frame_rows_and_means(self, panel):
        config = quick_config(chains=1, iterations=16, burn_in=8, thin=2)
        result = run_loocv(panel, config, ["M0", "M1:beta0"])
        frame = loocv_frame(result)
        assert len(frame) == 2 * (panel.n_sites + 1)
        assert frame["variant"].unique().tolist() == ["M0", "M1(beta0)"]
        means = frame[frame["site"] == "mean"].set_index("variant")
        per_site = frame[frame["site"] != "mean"].groupby("variant")["rmse"].mean()
        assert means.loc["M0", "rmse"] == pytest.approx(per_site["M0"])
        assert set(loocv_summary(result)) == {"M0", "M1(beta0)"}

    def test_needs_two_sites(self, panel):
        with pytest.raises(DataValidationError):
            run_loocv(panel.select_sites([0]), quick_config(chains=1), ["M0"])

    @pytest.mark.slow
    def test_full_lattice(self, larger_panel):
        config = quick_config(chains=2, iterations=200, burn_in=100, thin=5)
        result = run_loocv(larger_panel, config, STANDARD_LATTICE)
        assert len(result.variants) == len(STANDARD_LATTICE)
        assert not result.failures()
        for code in result.variants:
            assert 0.0 <= result.means(code)["cvg"] <= 1.0

    def test_unscorable_site_is_recorded_not_raised(self, panel):
        values = np.array(panel.values)
        values[:, 1:, 2] = np.nan
        sparse = PanelDataset(sites=panel.sites, values=values, day_of_year_offset=panel.day_of_year_offset)
        result = run_loocv(sparse, quick_config(chains=1, iterations=16, burn_in=8, thin=2), ["M0"])
        scores = {score.site: score for score in result.scores["M0"]}
        assert scores["S01"].ok and scores["S02"].ok
        assert not scores["S03"].ok
        assert "no observed cell" in scores["S03"].error
        assert result.means("M0")["rmse"] == pytest.approx(np.mean([scores["S01"].rmse, scores["S02"].rmse]))


@pytest.mark.slow
class TestHeldOutSites:
    CONFIG = dict(chains=2, iterations=400, burn_in=200, thin=4)

    def test_ninety_percent_intervals_are_calibrated(self):
        sites = grid_sites(9, spacing_km=50.0, seed=6)
        dataset, _ = simulate_panel(reference_spec(sites, n_years=8, n_days=30, seed=21))
        result = run_loocv(dataset, quick_config(**self.CONFIG), ["M4"])
        assert not result.failures()
        assert 0.85 <= result.means("M4")["cvg"] <= 0.95

    def test_spatial_intercept_beats_a_global_one(self):
        sites = grid_sites(9, spacing_km=50.0, seed=6)
        gradient = [25.70 + 0.1 * (site.x - 50.0) for site in sites]
        spec = reference_spec(sites, n_years=8, n_days=30, seed=22, sigma_beta0=5.0,
                              field_values={FieldName.BETA0: gradient})
        dataset, _ = simulate_panel(spec)
        result = run_loocv(dataset, quick_config(**self.CONFIG), ["M0", "M1:beta0"])
        assert not result.failures()
        flat, spatial = result.means("M0"), result.means("M1:beta0")
        assert spatial["rmse"] < flat["rmse"]
        assert spatial["crps"] < flat["crps"]
