# sampler/joint.py

import numpy as np

from .context import GibbsContext
from ..models.state import ModelState
from ..models.variant import FIELD_ORDER
from ..spatial.gaussian import inverse_gamma_logpdf, mvn_logpdf_centered, normal_logpdf


def log_likelihood(state: ModelState, ctx: GibbsContext) -> float:
    """Days 2..L of every complete site-year given day 1; recomputed from scratch."""
    ws = ctx.workspace
    X = ws.residuals(state)
    innovations = ws.filtered(state.latents.rho, X)
    sig2 = state.latents.sigma2_eps
    terms = normal_logpdf(innovations, 0.0, sig2[None, None, :])
    return float(np.sum(terms * ws.active[:, None, :]))


def log_prior(state: ModelState, ctx: GibbsContext) -> float:
    """Process and hyperprior terms of every sampled component."""
    priors = ctx.priors
    fixed, lat, temporal, hyper = state.fixed, state.latents, state.temporal, state.hyper
    t = ctx.design.t
    total = 0.0

    gamma_mean = lat.beta0_tilde[None, :] + lat.alpha_tilde[None, :] * t[:, None] + temporal.psi[:, None]
    total += float(np.sum(normal_logpdf(temporal.gamma, gamma_mean, hyper.sigma2_eta)))

    psi = temporal.psi
    if len(psi) > 1:
        total += float(np.sum(normal_logpdf(psi[1:], hyper.rho_psi * psi[:-1], hyper.sigma2_lambda)))

    for field in FIELD_ORDER:
        if ctx.variant.enabled(field):
            total += mvn_logpdf_centered(
                state.field_values(field), state.field_mean(field),
                state.field_variance(field), ctx.correlation(state, field),
            )
            prior = ctx.variance_prior(field)
            total += inverse_gamma_logpdf(state.field_variance(field), prior.shape, prior.rate)
        prior = ctx.global_prior(field)
        total += float(normal_logpdf(state.field_mean(field), prior.mean, prior.variance))

    for name in ("beta1", "beta2"):
        prior = getattr(priors, name)
        total += float(normal_logpdf(getattr(fixed, name), prior.mean, prior.variance))
    if not ctx.beta3_pinned:
        total += float(normal_logpdf(fixed.beta3, priors.beta3.mean, priors.beta3.variance))

    for name in ("sigma2_lambda", "sigma2_eta"):
        prior = getattr(priors, name)
        total += inverse_gamma_logpdf(getattr(hyper, name), prior.shape, prior.rate)

    if not ctx.variant.pin_rho_psi_zero:
        low, high = priors.rho_psi_bounds
        if not low < hyper.rho_psi < high:
            return float("-inf")
        total -= float(np.log(high - low))
    return total


def log_joint_density(state: ModelState, ctx: GibbsContext) -> float:
    """Unnormalised log posterior; ratios of this drive the conditional checks."""
    return log_likelihood(state, ctx) + log_prior(state, ctx)
