import numpy as np
import pytest

from tmax_spacetime.models import HyperPriors, ModelVariant, PanelDataset, RunConfig
from tmax_spacetime.preprocessing import make_design
from tmax_spacetime.sampler.context import GibbsContext
from tmax_spacetime.simulation import grid_sites, simulate_panel, reference_spec


def build_context(dataset, variant="M4", pin_rho_psi_zero=True, phi_mode="fixed"):
    return GibbsContext(
        dataset,
        make_design(dataset),
        HyperPriors(phi_mode=phi_mode),
        ModelVariant.parse(variant, pin_rho_psi_zero=pin_rho_psi_zero),
    )


def quick_config(**overrides) -> RunConfig:
    values = dict(chains=2, iterations=30, burn_in=10, thin=2, seed=7)
    values.update(overrides)
    return RunConfig(**values)


@pytest.fixture
def sites():
    return grid_sites(3, spacing_km=40.0, seed=1)


@pytest.fixture
def simulated(sites):
    """Three sites, four years, six days with the reported posterior means as truth."""
    return simulate_panel(reference_spec(sites, n_years=4, n_days=6, seed=3))


@pytest.fixture
def panel(simulated):
    return simulated[0]


@pytest.fixture
def truth(simulated):
    return simulated[1]


@pytest.fixture
def gappy_panel(panel):
    """The small panel with one missing day in year 1 at the second site."""
    values = np.array(panel.values)
    values[0, 2, 1] = np.nan
    return PanelDataset(sites=panel.sites, values=values, day_of_year_offset=panel.day_of_year_offset)


@pytest.fixture
def larger_simulated():
    sites = grid_sites(6, spacing_km=60.0, seed=4)
    return simulate_panel(reference_spec(sites, n_years=6, n_days=20, seed=11))


@pytest.fixture
def larger_panel(larger_simulated):
    return larger_simulated[0]
