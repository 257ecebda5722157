"""Every full conditional must agree with ratios of the joint density.

For a Gaussian conditional N(m, v) of a component x, moving x between two
values a and b changes log p(all) by log N(a | m, v) - log N(b | m, v); the
same holds for inverse-gamma conditionals and, up to the target itself, for
the Metropolis log targets.
"""

import numpy as np
import pytest

from conftest import build_context
from tmax_spacetime.models.variant import FieldName
from tmax_spacetime.sampler import conditionals as cond
from tmax_spacetime.sampler.joint import log_joint_density
from tmax_spacetime.spatial.gaussian import inverse_gamma_logpdf, normal_logpdf

TOL = 1e-6


def joint_difference(state, ctx, setter, a, b):
    values = []
    for x in (a, b):
        moved = state.copy()
        setter(moved, x)
        values.append(log_joint_density(moved, ctx))
    return values[0] - values[1]


def gaussian_difference(mean, variance, a, b):
    return float(normal_logpdf(a, mean, variance) - normal_logpdf(b, mean, variance))


def check_gaussian(state, ctx, conditional, setter):
    mean, variance = conditional
    sd = np.sqrt(variance)
    a, b = mean + 0.7 * sd, mean - 0.4 * sd
    expected = gaussian_difference(mean, variance, a, b)
    assert joint_difference(state, ctx, setter, a, b) == pytest.approx(expected, abs=TOL)


def check_inverse_gamma(state, ctx, conditional, setter):
    shape, rate = conditional
    a, b = 0.8 * rate / shape, 1.3 * rate / shape
    expected = inverse_gamma_logpdf(a, shape, rate) - inverse_gamma_logpdf(b, shape, rate)
    assert joint_difference(state, ctx, setter, a, b) == pytest.approx(expected, abs=TOL)


def check_log_target(state, ctx, target, setter, a, b):
    expected = target(a) - target(b)
    assert joint_difference(state, ctx, setter, a, b) == pytest.approx(expected, abs=TOL)


@pytest.fixture
def ctx(panel):
    return build_context(panel)


@pytest.fixture
def state(truth, ctx):
    state = truth.copy()
    ctx.workspace.refresh(state)
    return state


def set_fixed(name):
    def setter(state, value):
        setattr(state.fixed, name, value)
    return setter


class TestFixedEffects:
    @pytest.mark.parametrize("name", ["beta1", "beta2"])
    def test_harmonic_coefficients(self, state, ctx, name):
        check_gaussian(state, ctx, cond.harmonic_conditional(state, ctx, name), set_fixed(name))

    def test_elevation_coefficient(self, state, ctx):
        check_gaussian(state, ctx, cond.elevation_conditional(state, ctx), set_fixed("beta3"))

    @pytest.mark.parametrize("field", list(FieldName))
    def test_global_means_of_enabled_fields(self, state, ctx, field):
        def setter(s, value):
            s.set_field_mean(field, value)
        check_gaussian(state, ctx, cond.global_mean_conditional(state, ctx, field), setter)


class TestCollapsedFields:
    @pytest.fixture
    def collapsed(self, panel, truth):
        ctx = build_context(panel, variant="M0")
        state = truth.copy()
        for field in FieldName:
            state.collapse_field(field)
        ctx.workspace.refresh(state)
        return state, ctx

    def test_intercept(self, collapsed):
        state, ctx = collapsed

        def setter(s, value):
            s.fixed.beta0 = value
            s.collapse_field(FieldName.BETA0)
        check_gaussian(state, ctx, cond.collapsed_intercept_conditional(state, ctx), setter)

    def test_slope(self, collapsed):
        state, ctx = collapsed

        def setter(s, value):
            s.fixed.alpha = value
            s.collapse_field(FieldName.ALPHA)
        check_gaussian(state, ctx, cond.collapsed_slope_conditional(state, ctx), setter)

    def test_autocorrelation(self, collapsed):
        state, ctx = collapsed

        def setter(s, value):
            s.hyper.z_rho = value
            s.collapse_field(FieldName.RHO)
        z = state.hyper.z_rho
        check_log_target(state, ctx, lambda v: cond.collapsed_rho_log_target(v, state, ctx), setter, z + 0.3, z - 0.2)

    def test_innovation_variance(self, collapsed):
        state, ctx = collapsed

        def setter(s, value):
            s.hyper.z_sig2 = value
            s.collapse_field(FieldName.SIGMA)
        z = state.hyper.z_sig2
        check_log_target(state, ctx, lambda v: cond.collapsed_sigma_log_target(v, state, ctx), setter, z + 0.25, z - 0.5)


class TestVariances:
    def test_yearly_innovation_variance(self, state, ctx):
        def setter(s, value):
            s.hyper.sigma2_lambda = value
        check_inverse_gamma(state, ctx, cond.lambda_variance_conditional(state, ctx), setter)

    def test_site_year_variance(self, state, ctx):
        def setter(s, value):
            s.hyper.sigma2_eta = value
        check_inverse_gamma(state, ctx, cond.eta_variance_conditional(state, ctx), setter)

    @pytest.mark.parametrize("field", list(FieldName))
    def test_field_variances(self, state, ctx, field):
        attr = {
            FieldName.BETA0: "sigma2_beta0",
            FieldName.ALPHA: "sigma2_alpha",
            FieldName.RHO: "sigma2_rho",
            FieldName.SIGMA: "sigma2_sig2",
        }[field]

        def setter(s, value):
            setattr(s.hyper, attr, value)
        check_inverse_gamma(state, ctx, cond.field_variance_conditional(state, ctx, field), setter)


class TestYearlyAutoregression:
    def test_rho_psi_matches_joint_inside_bounds(self, panel, truth):
        ctx = build_context(panel, pin_rho_psi_zero=False)
        state = truth.copy()
        state.hyper.rho_psi = 0.1
        ctx.workspace.refresh(state)
        mean, variance = cond.rho_psi_conditional(state)

        def setter(s, value):
            s.hyper.rho_psi = value
        expected = gaussian_difference(mean, variance, 0.35, -0.25)
        assert joint_difference(state, ctx, setter, 0.35, -0.25) == pytest.approx(expected, abs=TOL)

    def test_rho_psi_outside_bounds_has_zero_density(self, panel, truth):
        ctx = build_context(panel, pin_rho_psi_zero=False)
        state = truth.copy()
        state.hyper.rho_psi = 1.0
        assert log_joint_density(state, ctx) == float("-inf")

    def test_all_zero_psi_has_no_information(self, truth):
        state = truth.copy()
        state.temporal.psi = np.zeros_like(state.temporal.psi)
        mean, variance = cond.rho_psi_conditional(state)
        assert np.isnan(mean) and np.isnan(variance)


class TestDecayGrid:
    def test_log_weights_match_joint(self, panel, truth):
        ctx = build_context(panel, phi_mode="grid:4")
        state = truth.copy()
        ctx.workspace.refresh(state)
        grid = ctx.phi_grid[FieldName.ALPHA]
        weights = cond.phi_log_weights(state, ctx, FieldName.ALPHA)

        def setter(s, value):
            s.hyper.phi_alpha = value
        assert joint_difference(state, ctx, setter, grid[0], grid[3]) == pytest.approx(weights[0] - weights[3], abs=TOL)


class TestSiteFields:
    @pytest.mark.parametrize("site", [0, 2])
    def test_site_intercepts(self, state, ctx, site):
        def setter(s, value):
            s.latents.beta0_tilde[site] = value
        check_gaussian(state, ctx, cond.site_intercept_conditional(state, ctx, site), setter)

    @pytest.mark.parametrize("site", [0, 1])
    def test_site_slopes(self, state, ctx, site):
        def setter(s, value):
            s.latents.alpha_tilde[site] = value
        check_gaussian(state, ctx, cond.site_slope_conditional(state, ctx, site), setter)

    @pytest.mark.parametrize("site", [0, 2])
    def test_site_autocorrelation_target(self, state, ctx, site):
        def setter(s, value):
            s.latents.z_rho[site] = value
        z = state.latents.z_rho[site]
        target = lambda v: cond.site_rho_log_target(v, state, ctx, site)  # noqa: E731
        check_log_target(state, ctx, target, setter, z + 0.4, z - 0.3)

    @pytest.mark.parametrize("site", [1, 2])
    def test_site_variance_target(self, state, ctx, site):
        def setter(s, value):
            s.latents.z_sig2[site] = value
        z = state.latents.z_sig2[site]
        target = lambda v: cond.site_sigma_log_target(v, state, ctx, site)  # noqa: E731
        check_log_target(state, ctx, target, setter, z + 0.2, z - 0.35)

    def test_conditional_prior_of_one_site_matches_joint_field(self, state, ctx):
        mean, variance = cond.gp_conditional_prior(state, ctx, FieldName.BETA0, 1)
        corr = ctx.correlation(state, FieldName.BETA0)
        values = state.field_values(FieldName.BETA0)
        others = [0, 2]
        cov = state.field_variance(FieldName.BETA0) * corr.matrix
        gain = cov[1, others] @ np.linalg.inv(cov[np.ix_(others, others)])
        expected_mean = state.fixed.beta0 + gain @ (values[others] - state.fixed.beta0)
        expected_var = cov[1, 1] - gain @ cov[others, 1]
        assert mean == pytest.approx(expected_mean, rel=1e-9)
        assert variance == pytest.approx(expected_var, rel=1e-9)


class TestTemporalEffects:
    @pytest.mark.parametrize("year", [1, 2, 3])
    def test_psi_interior_and_last_year(self, state, ctx, year):
        def setter(s, value):
            s.temporal.psi[year] = value
        check_gaussian(state, ctx, cond.psi_conditional(state, ctx, year), setter)

    @pytest.mark.parametrize("cell", [(0, 0), (2, 1), (3, 2)])
    def test_site_year_effects(self, state, ctx, cell):
        means, variances = cond.gamma_conditional(state, ctx)

        def setter(s, value):
            s.temporal.gamma[cell] = value
        check_gaussian(state, ctx, (means[cell], variances[cell]), setter)

    def test_incomplete_site_year_follows_its_prior(self, gappy_panel, truth):
        ctx = build_context(gappy_panel)
        state = truth.copy()
        ctx.workspace.refresh(state)
        means, variances = cond.gamma_conditional(state, ctx)
        lat = state.latents
        prior_mean = lat.beta0_tilde[1] + lat.alpha_tilde[1] * ctx.design.t[0] + state.temporal.psi[0]
        assert not ctx.workspace.active[0, 1]
        assert means[0, 1] == pytest.approx(prior_mean)
        assert variances[0, 1] == pytest.approx(state.hyper.sigma2_eta)

        def setter(s, value):
            s.temporal.gamma[0, 1] = value
        check_gaussian(state, ctx, (means[0, 1], variances[0, 1]), setter)
