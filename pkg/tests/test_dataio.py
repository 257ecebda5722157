import json
from datetime import date

import numpy as np
import pytest

from conftest import quick_config
from tmax_spacetime import SpaceTimeSession
from tmax_spacetime.dataio import (
    dump_config,
    ingest,
    load_config,
    read_fit,
    read_sites,
    write_fit,
    write_panel,
    write_summary,
)
from tmax_spacetime.dataio.ingest import project_lonlat, season_day
from tmax_spacetime.exceptions import ConfigurationError, EmptyPanelError, IngestError
from tmax_spacetime.models.chain import pool_chains
from tmax_spacetime.preprocessing import build_design
from tmax_spacetime.sampler import run_chains
from tmax_spacetime.summary import posterior_summary

SITES_CSV = "id,x_km,y_km,elev_m\nA,0,0,100\nB,10,5,250\n"


@pytest.fixture
def sites_file(tmp_path):
    path = tmp_path / "sites.csv"
    path.write_text(SITES_CSV)
    return path


def observations(tmp_path, rows):
    path = tmp_path / "obs.csv"
    path.write_text("site_id,date,tmax_c\n" + "".join(f"{row}\n" for row in rows))
    return path


class TestSeasonDay:
    @pytest.mark.parametrize("day, expected", [
        (date(2001, 5, 1), 1),
        (date(2001, 5, 31), 31),
        (date(2001, 9, 30), 153),
        (date(2001, 4, 30), None),
        (date(2001, 10, 1), None),
    ])
    def test_positions(self, day, expected):
        assert season_day(day) == expected


class TestIngest:
    def test_panel_round_trip(self, panel, tmp_path):
        write_panel(panel, tmp_path / "sites.csv", tmp_path / "obs.csv")
        read = ingest(tmp_path / "sites.csv", tmp_path / "obs.csv")
        assert read.first_year == 2001
        assert read.site_ids == panel.site_ids
        assert read.values.shape == panel.values.shape
        np.testing.assert_allclose(read.values, panel.values)

    def test_missing_cells_survive(self, gappy_panel, tmp_path):
        write_panel(gappy_panel, tmp_path / "sites.csv", tmp_path / "obs.csv", base_year=1990)
        read = ingest(tmp_path / "sites.csv", tmp_path / "obs.csv")
        assert read.first_year == 1990
        assert read.missing[0, 2, 1]
        assert read.missing.sum() == 1

    def test_out_of_season_rows_are_skipped(self, sites_file, tmp_path):
        obs = observations(tmp_path, ["A,2001-04-30,18.0", "A,2001-05-01,20.5", "B,2001-05-02,21.0"])
        dataset = ingest(sites_file, obs)
        assert dataset.values.shape == (1, 2, 2)
        assert dataset.values[0, 0, 0] == 20.5
        assert dataset.missing[0, 0, 1] and dataset.missing[0, 1, 0]

    def test_years_between_observations_are_missing(self, sites_file, tmp_path):
        dataset = ingest(sites_file, observations(tmp_path, ["A,2001-05-01,20.0", "B,2003-05-01,22.0"]))
        assert dataset.n_years == 3
        assert dataset.missing[1].all()

    def test_explicit_season_length(self, sites_file, tmp_path):
        obs = observations(tmp_path, ["A,2001-05-03,20.0"])
        assert ingest(sites_file, obs, n_days=10).n_days == 10
        with pytest.raises(IngestError):
            ingest(sites_file, obs, n_days=2)

    def test_duplicate_rows_name_their_line(self, sites_file, tmp_path):
        obs = observations(tmp_path, ["A,2001-05-01,20.0", "A,2001-05-01,21.0"])
        with pytest.raises(IngestError) as info:
            ingest(sites_file, obs)
        assert info.value.line == 3

    @pytest.mark.parametrize("row", ["C,2001-05-01,20.0", "A,2001-13-01,20.0", "A,2001-05-01,hot", "A,2001-05-01,nan"])
    def test_bad_rows(self, sites_file, tmp_path, row):
        with pytest.raises(IngestError):
            ingest(sites_file, observations(tmp_path, [row]))

    def test_no_season_rows(self, sites_file, tmp_path):
        with pytest.raises(EmptyPanelError):
            ingest(sites_file, observations(tmp_path, ["A,2001-03-01,12.0"]))

    def test_empty_file(self, sites_file, tmp_path):
        path = tmp_path / "obs.csv"
        path.write_text("")
        with pytest.raises(EmptyPanelError):
            ingest(sites_file, path)

    def test_missing_column(self, tmp_path):
        path = tmp_path / "sites.csv"
        path.write_text("id,x_km,elev_m\nA,0,100\n")
        with pytest.raises(IngestError):
            read_sites(path)

    def test_duplicate_site_ids(self, tmp_path):
        path = tmp_path / "sites.csv"
        path.write_text("id,x_km,y_km,elev_m\nA,0,0,100\nA,1,1,100\n")
        with pytest.raises(IngestError):
            read_sites(path)


class TestLonLat:
    def test_one_degree_of_longitude_at_the_equator(self):
        x, y = project_lonlat(np.array([0.0, 1.0]), np.array([0.0, 0.0]))
        assert x[1] - x[0] == pytest.approx(111.195, abs=0.01)
        np.testing.assert_allclose(y, 0.0)
        assert x.sum() == pytest.approx(0.0)

    def test_lonlat_sites(self, tmp_path):
        path = tmp_path / "sites.csv"
        path.write_text("id,lon,lat,elev_m\nA,-1.0,41.5,200\nB,-0.5,41.5,300\n")
        sites = read_sites(path, coordinates="lonlat")
        assert sites[1].x - sites[0].x == pytest.approx(111.195 * 0.5 * np.cos(np.radians(41.5)), rel=1e-3)


class TestConfig:
    def test_yaml_with_overrides(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text("iterations: 20\nburn-in: 5\nvariant: M1:beta0\nchains: 3\n")
        config = load_config(path, seed=11, chains=None)
        assert (config.iterations, config.burn_in, config.chains, config.seed) == (20, 5, 3, 11)
        assert config.model_variant.label == "M1(beta0)"

    def test_priors_from_pairs(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text("priors:\n  beta1: [0.0, 25.0]\n  sigma2_eta: [3.0, 0.5]\n")
        priors = load_config(path).priors
        assert priors.beta1.variance == 25.0
        assert priors.sigma2_eta.shape == 3.0

    @pytest.mark.parametrize("text", [
        "iterations: 10\nburn-in: 10\n",
        "variant: M5\n",
        "colour: blue\n",
        "- just\n- a list\n",
    ])
    def test_invalid_files(self, tmp_path, text):
        path = tmp_path / "run.yaml"
        path.write_text(text)
        with pytest.raises(ConfigurationError):
            load_config(path)

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_config(tmp_path / "absent.yaml")

    def test_dump_and_reload(self, tmp_path):
        config = quick_config(variant="M2:beta0,sigma", phi_mode="grid:5")
        reloaded = load_config(dump_config(config, tmp_path / "config.yaml"))
        assert reloaded.variant == config.variant
        assert reloaded.priors.phi_mode == "grid:5"
        assert reloaded.n_draws == config.n_draws


class TestFitFiles:
    @pytest.fixture
    def chains(self, panel):
        return run_chains(panel, quick_config(chains=2, iterations=12, burn_in=4, thin=2, variant="M1:alpha"))

    def test_round_trip(self, chains, tmp_path):
        paths = write_fit(chains, tmp_path / "fit")
        assert paths["draws"].exists() and paths["fit"].exists()
        restored = read_fit(tmp_path / "fit")
        assert [c.chain_index for c in restored] == [0, 1]
        for before, after in zip(chains, restored):
            assert after.seed == before.seed
            assert after.variant == before.variant
            assert after.held == before.held
            np.testing.assert_array_equal(after.draw_iterations, before.draw_iterations)
            np.testing.assert_allclose(after.scalars["sigma2_eta"], before.scalars["sigma2_eta"], rtol=1e-12)
            np.testing.assert_allclose(after.site_fields["alpha_tilde"], before.site_fields["alpha_tilde"], rtol=1e-12)
            np.testing.assert_allclose(after.gamma, before.gamma, rtol=1e-12)
            np.testing.assert_allclose(after.site_fields["z_rho"], before.site_fields["z_rho"], rtol=1e-12)

    def test_no_chains(self, tmp_path):
        with pytest.raises(ValueError):
            write_fit([], tmp_path)

    def test_summary_json(self, chains, tmp_path):
        path = write_summary(posterior_summary(pool_chains(chains)), tmp_path / "summary.json")
        data = json.loads(path.read_text())
        assert "beta1" in data
        assert "alpha[S03]" in data
        assert "rho_y[S03]" not in data


class TestDayOfYearOffset:
    def test_offset_reaches_the_harmonic_phases(self, panel, tmp_path):
        write_panel(panel, tmp_path / "sites.csv", tmp_path / "obs.csv")
        shifted = ingest(tmp_path / "sites.csv", tmp_path / "obs.csv")
        literal = ingest(tmp_path / "sites.csv", tmp_path / "obs.csv", day_of_year_offset=0)
        assert (shifted.day_of_year_offset, literal.day_of_year_offset) == (120, 0)
        shifted_basis, _ = build_design(shifted)
        literal_basis, _ = build_design(literal)
        assert literal_basis.sin[0] == pytest.approx(np.sin(2 * np.pi / 365))
        assert shifted_basis.sin[0] == pytest.approx(np.sin(2 * np.pi * 121 / 365))
        assert not np.allclose(literal_basis.sin, shifted_basis.sin)

    def test_config_offset_is_used_by_the_session(self, panel, tmp_path):
        write_panel(panel, tmp_path / "sites.csv", tmp_path / "obs.csv")
        config = tmp_path / "run.yaml"
        config.write_text("chains: 1\niterations: 6\nburn-in: 2\nthin: 1\nday-of-year-offset: 0\n")
        session = SpaceTimeSession.from_files(sites_path=tmp_path / "sites.csv",
                                              observations_path=tmp_path / "obs.csv", config_path=config)
        assert session.config.day_of_year_offset == 0
        assert session.dataset.day_of_year_offset == 0
        chains = session.fitting.fit()
        assert chains[0].day_of_year_offset == 0
