import numpy as np
import pytest
from pydantic import ValidationError

from tmax_spacetime.exceptions import ConfigurationError, DataValidationError, EmptyPanelError
from tmax_spacetime.models import ChainSettings, HyperPriors, ModelVariant, PanelDataset, RunConfig, SiteMeta
from tmax_spacetime.models.variant import STANDARD_LATTICE, FieldName, standard_lattice
from tmax_spacetime.utils import derive_seed, parse_window

SITES = [SiteMeta(id="A", x=0.0, y=0.0, elevation=100.0), SiteMeta(id="B", x=3.0, y=4.0, elevation=200.0)]


class TestModelVariant:
    @pytest.mark.parametrize("text, code, label", [
        ("M0", "M0", "M0"),
        ("M4", "M4", "M4"),
        ("M1:rho", "M1:rho", "M1(rho)"),
        ("M2:sigma, beta0", "M2:beta0,sigma", "M2(beta0,sigma)"),
    ])
    def test_canonical_forms(self, text, code, label):
        variant = ModelVariant.parse(text)
        assert variant.code == code
        assert variant.label == label

    def test_enabled_fields(self):
        variant = ModelVariant.parse("M3:alpha,rho,sigma")
        assert variant.enabled_fields == [FieldName.ALPHA, FieldName.RHO, FieldName.SIGMA]
        assert not variant.enabled(FieldName.BETA0)

    @pytest.mark.parametrize("text", ["M5", "M2:beta0", "M1:gamma", "M2:beta0,beta0", "model4", "M0:rho"])
    def test_invalid(self, text):
        with pytest.raises(ConfigurationError):
            ModelVariant.parse(text)

    def test_lattice_round_trips(self):
        assert [v.code for v in standard_lattice()] == STANDARD_LATTICE
        assert all(not v.pin_rho_psi_zero for v in standard_lattice(pin_rho_psi_zero=False))


class TestRunConfig:
    def test_protocol_defaults(self):
        config = RunConfig()
        assert (config.chains, config.iterations, config.burn_in, config.thin) == (10, 200_000, 100_000, 100)
        assert config.n_draws == 1000
        assert config.model_variant.code == "M4"

    def test_burn_in_must_precede_the_end(self):
        with pytest.raises(ConfigurationError):
            RunConfig(iterations=10, burn_in=10)

    def test_unknown_fields(self):
        with pytest.raises(ValidationError):
            RunConfig(temperature=30)

    def test_phi_mode_is_applied_to_priors(self):
        assert RunConfig(phi_mode="grid:6").priors.phi_grid_size == 6
        with pytest.raises(ConfigurationError):
            RunConfig(phi_mode="grid:x")

    def test_overrides_ignore_none(self):
        config = RunConfig(seed=3).with_overrides(seed=None, chains=2)
        assert (config.seed, config.chains) == (3, 2)

    def test_chain_settings_burn_in(self):
        with pytest.raises(ConfigurationError):
            ChainSettings(iterations=5, burn_in=6)
        assert ChainSettings(iterations=30, burn_in=10, thin=4).n_draws == 5

    def test_prior_pairs(self):
        priors = HyperPriors(beta0=[20.0, 4.0], sigma2_lambda=[3.0, 2.0])
        assert priors.beta0.precision == 0.25
        assert priors.sigma2_lambda.mean == 1.0


class TestPanelDataset:
    def test_nan_marks_missing_and_arrays_are_read_only(self):
        values = np.full((2, 3, 2), 20.0)
        values[1, 2, 0] = np.nan
        panel = PanelDataset(sites=SITES, values=values, first_year=1990)
        assert panel.missing.sum() == 1
        assert not panel.values.flags.writeable
        assert panel.complete_mask().tolist() == [[True, True], [False, True]]
        assert panel.completeness()["A"] == pytest.approx(5 / 6)
        assert panel.year_label(2) == 1991 and panel.year_index(1991) == 2

    def test_year_outside_panel(self):
        panel = PanelDataset(sites=SITES, values=np.full((2, 3, 2), 20.0), first_year=1990)
        with pytest.raises(DataValidationError):
            panel.year_index(1995)

    @pytest.mark.parametrize("values", [np.full((2, 3), 20.0), np.full((2, 3, 3), 20.0), np.full((1, 2, 2), 75.0)])
    def test_invalid_values(self, values):
        with pytest.raises(DataValidationError):
            PanelDataset(sites=SITES, values=values)

    def test_empty(self):
        with pytest.raises(EmptyPanelError):
            PanelDataset(sites=SITES, values=np.zeros((0, 3, 2)))

    def test_select_and_drop(self):
        panel = PanelDataset(sites=SITES, values=np.arange(12.0).reshape(2, 3, 2))
        dropped = panel.drop_site(0)
        assert dropped.site_ids == ["B"]
        np.testing.assert_array_equal(dropped.series(0), panel.series(1))


class TestSiteMeta:
    def test_aliases(self):
        site = SiteMeta.model_validate({"id": "X", "x_km": 1.0, "y_km": 2.0, "elev_m": 300.0})
        assert (site.x, site.y, site.elevation) == (1.0, 2.0, 300.0)

    @pytest.mark.parametrize("update", [{"id": "a,b"}, {"id": " "}, {"elevation": 12000.0}, {"x": float("inf")}])
    def test_invalid(self, update):
        data = dict(id="A", x=0.0, y=0.0, elevation=10.0)
        data.update(update)
        with pytest.raises(ValidationError):
            SiteMeta(**data)


def test_derived_seeds():
    assert [derive_seed(20240101, k) for k in range(3)] == [20240101, 20240100, 20240103]


@pytest.mark.parametrize("text, expected", [("1956-1985", (1956, 1985)), ("3:12", (3, 12)), ("2001", (2001, 2001))])
def test_parse_window(text, expected):
    assert parse_window(text) == expected
