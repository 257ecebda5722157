import numpy as np
import pytest

from conftest import quick_config
from tmax_spacetime.diagnostics import (
    diagnose,
    equilibrium_covariance,
    ess,
    export_trace,
    read_trace,
    rhat,
    thin_indices,
    thin_protocol,
)
from tmax_spacetime.exceptions import InsufficientDrawsError
from tmax_spacetime.models import HyperState, ModelVariant
from tmax_spacetime.sampler import run_chains
from tmax_spacetime.simulation import simulate_gamma_fields, reference_spec


def ar1_chains(rho, m=4, n=2000, seed=0):
    rng = np.random.default_rng(seed)
    chains = np.zeros((m, n))
    for j in range(m):
        x = rng.standard_normal()
        for k in range(n):
            x = rho * x + np.sqrt(1 - rho ** 2) * rng.standard_normal()
            chains[j, k] = x
    return chains


class TestRhat:
    def test_identical_chains(self):
        assert rhat([[1.0, 2.0, 3.0], [1.0, 2.0, 3.0]]) == pytest.approx(np.sqrt(2.0 / 3.0))

    def test_constant_chains(self):
        assert rhat([[2.0] * 5, [2.0] * 5]) == 1.0
        assert rhat([[2.0] * 5, [3.0] * 5]) == float("inf")

    def test_independent_draws_are_near_one(self):
        rng = np.random.default_rng(1)
        assert rhat(rng.standard_normal((4, 1000))) < 1.02

    def test_separated_chains_fail(self):
        rng = np.random.default_rng(2)
        chains = rng.standard_normal((2, 500)) + np.array([[0.0], [5.0]])
        assert rhat(chains) > 1.2

    def test_needs_two_chains(self):
        with pytest.raises(ValueError):
            rhat([[1.0, 2.0, 3.0]])


class TestEss:
    def test_independent_draws(self):
        rng = np.random.default_rng(3)
        value = ess(rng.standard_normal((4, 1000)))
        assert 0.8 * 4000 <= value <= 1.05 * 4000

    def test_autocorrelated_draws(self):
        value = ess(ar1_chains(0.9))
        expected = 8000 * (1 - 0.9) / (1 + 0.9)
        assert 0.5 * expected < value < 2.0 * expected

    def test_constant_chain(self):
        assert ess(np.ones((2, 10))) == 1.0

    def test_needs_four_draws(self):
        with pytest.raises(ValueError):
            ess([[1.0, 2.0, 3.0]])


class TestThinning:
    def test_stride_indices_end_on_the_stride(self):
        idx = thin_indices(1000, 100)
        assert len(idx) == 100
        assert idx[0] == 9 and idx[-1] == 999
        assert np.all(np.diff(idx) == 10)

    def test_too_few_draws(self):
        with pytest.raises(InsufficientDrawsError) as info:
            thin_indices(5, 10)
        assert info.value.required == 10

    def test_protocol_views(self, panel):
        chains = run_chains(panel, quick_config(chains=1, iterations=50, burn_in=10, thin=1))
        long_view, short_view = thin_protocol(chains[0], rhat_target=20, inference_target=8)
        assert long_view.n_draws == 20
        assert short_view.n_draws == 8
        assert short_view.draw_iterations[-1] == chains[0].draw_iterations[-1]


class TestDiagnose:
    @pytest.fixture
    def chains(self, panel):
        return run_chains(panel, quick_config(chains=2, iterations=40, burn_in=10, thin=1, variant="M1:beta0"))

    def test_reports_only_sampled_parameters(self, chains):
        report = diagnose(chains)
        assert report.n_chains == 2
        assert report.rhat_draws_per_chain == 30
        assert "beta1" in report.rhat and "beta1" in report.ess
        assert "beta0_tilde[S01]" in report.rhat
        assert not any(name.startswith("alpha_tilde[") for name in report.rhat)
        assert "rho_psi" not in report.rhat
        assert "z_rho" in report.acceptance

    def test_explicit_targets(self, chains):
        report = diagnose(chains, rhat_target=10, inference_target=5)
        assert report.rhat_draws_per_chain == 10
        assert report.ess_draws_per_chain == 5

    def test_trace_round_trip(self, chains, tmp_path):
        path = export_trace(chains, tmp_path / "draws.csv")
        frame = read_trace(path)
        rows = frame[(frame["chain"] == 1) & (frame["param"] == "beta2")]
        np.testing.assert_array_equal(rows["value"].to_numpy(), chains[1].scalars["beta2"])
        assert "gamma[2,S03]" in set(frame["param"])

    def test_no_chains(self):
        with pytest.raises(ValueError):
            diagnose([])


class TestEquilibriumCovariance:
    def hyper(self, spec):
        return HyperState(
            sigma2_lambda=spec.sigma_lambda ** 2, sigma2_eta=spec.sigma_eta ** 2,
            sigma2_beta0=spec.sigma_beta0 ** 2, sigma2_alpha=spec.sigma_alpha ** 2,
            phi_beta0=spec.decay, phi_alpha=spec.decay,
        )

    def test_disabled_fields_drop_out(self):
        hyper = HyperState(sigma2_lambda=0.5, sigma2_eta=0.1, sigma2_beta0=2.0, sigma2_alpha=0.3)
        only_years = equilibrium_covariance(hyper, 10.0, 1.0, 0, variant=ModelVariant.parse("M0"))
        assert only_years == pytest.approx(0.5)
        with_nugget = equilibrium_covariance(hyper, 0.0, 1.0, 0, variant=ModelVariant.parse("M0"))
        assert with_nugget == pytest.approx(0.6)
        no_nugget = equilibrium_covariance(hyper, 0.0, 1.0, 0, variant=ModelVariant.parse("M0"), include_nugget=False)
        assert no_nugget == pytest.approx(0.5)

    def test_yearly_correlation_decays_geometrically(self):
        hyper = HyperState(rho_psi=0.5, sigma2_lambda=0.75)
        lagged = equilibrium_covariance(hyper, 20.0, 0.0, 2, variant=ModelVariant.parse("M0"))
        assert lagged == pytest.approx(0.75 / 0.75 * 0.25)

    @pytest.mark.slow
    def test_matches_simulated_site_year_effects(self, sites):
        spec = reference_spec(sites, n_years=4, n_days=2, seed=0)
        gamma = simulate_gamma_fields(spec, n_replicates=4000, seed=21)
        hyper = self.hyper(spec)
        t = np.arange(1, 5, dtype=float) - 2.5
        d = np.sqrt((sites[0].x - sites[1].x) ** 2 + (sites[0].y - sites[1].y) ** 2)
        centred = gamma - gamma.mean(axis=0, keepdims=True)

        same = np.mean(centred[:, 2, 0] * centred[:, 2, 0])
        assert same == pytest.approx(equilibrium_covariance(hyper, 0.0, t[2], 0), abs=0.3)
        across = np.mean(centred[:, 2, 0] * centred[:, 2, 1])
        assert across == pytest.approx(equilibrium_covariance(hyper, d, t[2], 0), abs=0.3)
        lagged = np.mean(centred[:, 1, 0] * centred[:, 3, 1])
        assert lagged == pytest.approx(equilibrium_covariance(hyper, d, t[1], 2), abs=0.3)
