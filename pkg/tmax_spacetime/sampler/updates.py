# sampler/updates.py

import logging

import numpy as np
from scipy.stats import truncnorm

from . import conditionals as cond
from .context import GibbsContext
from .tuner import MhTuner
from ..exceptions import TmaxModelError
from ..models.state import ModelState
from ..models.variant import FieldName

logger = logging.getLogger(__name__)


def _normal(rng: np.random.Generator, mean: float, variance: float) -> float:
    return float(mean + np.sqrt(variance) * rng.standard_normal())


def _metropolis(z: float, log_target, sd: float, rng: np.random.Generator):
    """One random-walk step; returns (new value, accepted)."""
    proposal = z + sd * rng.standard_normal()
    log_ratio = log_target(proposal) - log_target(z)
    if np.log(rng.uniform()) < log_ratio:
        return float(proposal), True
    return float(z), False


def update_global_means(state: ModelState, ctx: GibbsContext, tuner: MhTuner,
                        rng: np.random.Generator) -> ModelState:
    """beta0, alpha, beta1, beta2, beta3, z_rho, z_sig2 in that order."""
    ws = ctx.workspace
    variant = ctx.variant

    # intercept and slope enter only through gamma's prior mean
    if variant.beta0:
        state.fixed.beta0 = _normal(rng, *cond.global_mean_conditional(state, ctx, FieldName.BETA0))
    else:
        state.fixed.beta0 = _normal(rng, *cond.collapsed_intercept_conditional(state, ctx))
        state.collapse_field(FieldName.BETA0)
    if variant.alpha:
        state.fixed.alpha = _normal(rng, *cond.global_mean_conditional(state, ctx, FieldName.ALPHA))
    else:
        state.fixed.alpha = _normal(rng, *cond.collapsed_slope_conditional(state, ctx))
        state.collapse_field(FieldName.ALPHA)

    for name, covariate in (("beta1", ctx.design.sin), ("beta2", ctx.design.cos)):
        old = getattr(state.fixed, name)
        new = _normal(rng, *cond.harmonic_conditional(state, ctx, name))
        setattr(state.fixed, name, new)
        ws.shift((new - old) * covariate[None, :, None])

    if not ctx.beta3_pinned:
        old = state.fixed.beta3
        new = _normal(rng, *cond.elevation_conditional(state, ctx))
        state.fixed.beta3 = new
        ws.shift((new - old) * ctx.design.elev[None, None, :])

    if variant.rho:
        state.hyper.z_rho = _normal(rng, *cond.global_mean_conditional(state, ctx, FieldName.RHO))
    else:
        z, accepted = _metropolis(
            state.hyper.z_rho,
            lambda v: cond.collapsed_rho_log_target(v, state, ctx),
            tuner.proposal_sd("z_rho", 0),
            rng,
        )
        tuner.record("z_rho", 0, accepted)
        state.hyper.z_rho = z
        state.collapse_field(FieldName.RHO)

    if variant.sigma:
        state.hyper.z_sig2 = _normal(rng, *cond.global_mean_conditional(state, ctx, FieldName.SIGMA))
    else:
        z, accepted = _metropolis(
            state.hyper.z_sig2,
            lambda v: cond.collapsed_sigma_log_target(v, state, ctx),
            tuner.proposal_sd("z_sig2", 0),
            rng,
        )
        tuner.record("z_sig2", 0, accepted)
        state.hyper.z_sig2 = z
        state.collapse_field(FieldName.SIGMA)
    return state


def update_rho_psi(state: ModelState, ctx: GibbsContext, rng: np.random.Generator) -> ModelState:
    """Truncated-normal draw of the yearly AR coefficient; skipped when pinned at zero."""
    if ctx.variant.pin_rho_psi_zero or ctx.n_years < 2:
        return state
    low, high = ctx.priors.rho_psi_bounds
    mean, variance = cond.rho_psi_conditional(state)
    if not np.isfinite(mean):
        # no lagged signal: the conditional is the prior restricted to (low, high)
        value = float(rng.uniform(low, high))
    else:
        sd = np.sqrt(variance)
        value = float(truncnorm.rvs((low - mean) / sd, (high - mean) / sd, loc=mean, scale=sd,
                                    random_state=rng))
    # keep strictly inside the open interval
    state.hyper.rho_psi = float(np.clip(value, np.nextafter(low, high), np.nextafter(high, low)))
    return state


def _draw_variance(rng: np.random.Generator, shape: float, rate: float) -> float:
    return float(1.0 / rng.gamma(shape, 1.0 / rate))


def update_variances(state: ModelState, ctx: GibbsContext, rng: np.random.Generator) -> ModelState:
    """sigma2_lambda, sigma2_eta and the variances of the enabled fields."""
    hyper = state.hyper
    hyper.sigma2_lambda = _draw_variance(rng, *cond.lambda_variance_conditional(state, ctx))
    hyper.sigma2_eta = _draw_variance(rng, *cond.eta_variance_conditional(state, ctx))
    for field in ctx.variant.enabled_fields:
        value = _draw_variance(rng, *cond.field_variance_conditional(state, ctx, field))
        setattr(hyper, f"sigma2_{_SUFFIX[field]}", value)
    return state


_SUFFIX = {
    FieldName.BETA0: "beta0",
    FieldName.ALPHA: "alpha",
    FieldName.RHO: "rho",
    FieldName.SIGMA: "sig2",
}


def update_phi_discrete(state: ModelState, ctx: GibbsContext, rng: np.random.Generator) -> ModelState:
    """Discrete draw of each enabled field's decay from its grid; no-op with fixed decays."""
    if not ctx.phi_sampled:
        return state
    for field in ctx.variant.enabled_fields:
        grid = ctx.phi_grid[field]
        log_w = cond.phi_log_weights(state, ctx, field)
        if not np.any(np.isfinite(log_w)):
            raise TmaxModelError(f"every decay on the grid of {field.value} has zero weight")
        prob = np.exp(log_w - np.max(log_w))
        prob /= prob.sum()
        setattr(state.hyper, f"phi_{_SUFFIX[field]}", float(grid[rng.choice(len(grid), p=prob)]))
    return state


def update_site_gaussian_fields(state: ModelState, ctx: GibbsContext, rng: np.random.Generator) -> ModelState:
    """Site intercepts then site slopes, one site at a time."""
    if ctx.variant.beta0:
        for i in range(ctx.n_sites):
            state.latents.beta0_tilde[i] = _normal(rng, *cond.site_intercept_conditional(state, ctx, i))
    if ctx.variant.alpha:
        for i in range(ctx.n_sites):
            state.latents.alpha_tilde[i] = _normal(rng, *cond.site_slope_conditional(state, ctx, i))
    return state


def update_site_latents_mh(state: ModelState, ctx: GibbsContext, tuner: MhTuner,
                           rng: np.random.Generator) -> ModelState:
    """Random-walk Metropolis for each site's z_rho, then each site's z_sig2."""
    lat = state.latents
    if ctx.variant.rho:
        for i in range(ctx.n_sites):
            lat.z_rho[i], accepted = _metropolis(
                lat.z_rho[i],
                lambda v: cond.site_rho_log_target(v, state, ctx, i),
                tuner.proposal_sd("z_rho", i),
                rng,
            )
            tuner.record("z_rho", i, accepted)
    if ctx.variant.sigma:
        for i in range(ctx.n_sites):
            lat.z_sig2[i], accepted = _metropolis(
                lat.z_sig2[i],
                lambda v: cond.site_sigma_log_target(v, state, ctx, i),
                tuner.proposal_sd("z_sig2", i),
                rng,
            )
            tuner.record("z_sig2", i, accepted)
    return state


def update_psi(state: ModelState, ctx: GibbsContext, rng: np.random.Generator) -> ModelState:
    """Yearly effects for t = 2..T in order; psi of the first year stays 0."""
    for year in range(1, ctx.n_years):
        state.temporal.psi[year] = _normal(rng, *cond.psi_conditional(state, ctx, year))
    return state


def update_gamma(state: ModelState, ctx: GibbsContext, rng: np.random.Generator) -> ModelState:
    """All site-year effects at once; they are conditionally independent."""
    mean, variance = cond.gamma_conditional(state, ctx)
    new = mean + np.sqrt(variance) * rng.standard_normal(mean.shape)
    ctx.workspace.shift((new - state.temporal.gamma)[:, None, :])
    state.temporal.gamma = new
    return state
