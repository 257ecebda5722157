"""Full conditional distributions of the space-time model.

Every function here is pure: it reads the state and the context and returns
the parameters of a distribution, never a draw. Gaussian conditionals are
returned as (mean, variance), inverse-gamma ones as (shape, rate) of the
precision, Metropolis targets as unnormalised log densities.
"""

from typing import Tuple

import numpy as np

from .context import GibbsContext
from ..exceptions import NumericalDegeneracyError
from ..models.state import ModelState
from ..models.variant import FieldName
from ..spatial.gaussian import combine_precisions, normal_logpdf

Gaussian = Tuple[float, float]


def _with_prior(precision, weighted, prior, context: str) -> Gaussian:
    mean, variance = combine_precisions(
        precision + prior.precision, weighted + prior.mean * prior.precision, context
    )
    return float(mean), float(variance)


def _check_rho(rho: np.ndarray) -> None:
    if np.any(np.abs(rho) >= 1.0):
        raise NumericalDegeneracyError("site autocorrelation reached +/-1")


# fixed effects -------------------------------------------------------------

def _regression_conditional(state: ModelState, ctx: GibbsContext, name: str, weights: np.ndarray) -> Gaussian:
    """Coefficient ``name`` with AR-filtered covariate ``weights`` [L-1 x I]."""
    ws = ctx.workspace
    rho = state.latents.rho
    sig2 = state.latents.sigma2_eps
    coef = getattr(state.fixed, name)
    filtered = ws.filtered(rho)
    mask = ws.active[:, None, :]
    leave_out = (filtered + coef * weights[None, :, :]) * mask
    precision = float(np.sum(ws.n_active * np.sum(weights ** 2, axis=0) / sig2))
    if not precision > 0:
        raise NumericalDegeneracyError(f"{name}: the filtered covariate carries no information")
    weighted = float(np.sum(np.einsum("tli,li->i", leave_out, weights) / sig2))
    return _with_prior(precision, weighted, getattr(ctx.priors, name), name)


def harmonic_conditional(state: ModelState, ctx: GibbsContext, name: str) -> Gaussian:
    """beta1 (sin) or beta2 (cos)."""
    covariate = ctx.design.sin if name == "beta1" else ctx.design.cos
    rho = state.latents.rho
    weights = covariate[1:, None] - rho[None, :] * covariate[:-1, None]
    return _regression_conditional(state, ctx, name, weights)


def elevation_conditional(state: ModelState, ctx: GibbsContext) -> Gaussian:
    rho = state.latents.rho
    weights = np.broadcast_to(ctx.design.elev * (1.0 - rho), (ctx.n_days - 1, ctx.n_sites))
    return _regression_conditional(state, ctx, "beta3", weights)


def global_mean_conditional(state: ModelState, ctx: GibbsContext, field: FieldName) -> Gaussian:
    """Global mean of an enabled field given its site values."""
    corr = ctx.correlation(state, field)
    sigma2 = state.field_variance(field)
    values = state.field_values(field)
    precision = corr.total_precision / sigma2
    weighted = float((corr.precision @ values).sum()) / sigma2
    return _with_prior(precision, weighted, ctx.global_prior(field), f"global {field.value}")


def _gamma_prior_mean(state: ModelState, ctx: GibbsContext) -> np.ndarray:
    t = ctx.design.t
    lat = state.latents
    return lat.beta0_tilde[None, :] + lat.alpha_tilde[None, :] * t[:, None] + state.temporal.psi[:, None]


def collapsed_intercept_conditional(state: ModelState, ctx: GibbsContext) -> Gaussian:
    """beta0 when its field is disabled: every gamma informs it directly."""
    t = ctx.design.t
    sigma2_eta = state.hyper.sigma2_eta
    resid = state.temporal.gamma - state.latents.alpha_tilde[None, :] * t[:, None] - state.temporal.psi[:, None]
    precision = resid.size / sigma2_eta
    weighted = float(resid.sum()) / sigma2_eta
    return _with_prior(precision, weighted, ctx.priors.beta0, "beta0")


def collapsed_slope_conditional(state: ModelState, ctx: GibbsContext) -> Gaussian:
    """alpha when its field is disabled."""
    t = ctx.design.t
    sigma2_eta = state.hyper.sigma2_eta
    resid = state.temporal.gamma - state.latents.beta0_tilde[None, :] - state.temporal.psi[:, None]
    precision = ctx.n_sites * float(np.sum(t ** 2)) / sigma2_eta
    weighted = float(np.sum(t[:, None] * resid)) / sigma2_eta
    return _with_prior(precision, weighted, ctx.priors.alpha, "alpha")


def collapsed_rho_log_target(z: float, state: ModelState, ctx: GibbsContext) -> float:
    """Global z_rho when its field is disabled: pooled AR likelihood times the prior."""
    rho = np.tanh(z / 2.0)
    sse = ctx.workspace.sse(rho)
    prior = ctx.priors.z_rho
    return float(-np.sum(sse / (2.0 * state.latents.sigma2_eps)) + normal_logpdf(z, prior.mean, prior.variance))


def collapsed_sigma_log_target(z: float, state: ModelState, ctx: GibbsContext) -> float:
    """Global z_sig2 when its field is disabled."""
    ws = ctx.workspace
    sse = ws.sse(state.latents.rho)
    prior = ctx.priors.z_sig2
    loglik = -0.5 * z * ws.n_transitions.sum() - np.sum(sse) / (2.0 * np.exp(z))
    return float(loglik + normal_logpdf(z, prior.mean, prior.variance))


# yearly autoregression ------------------------------------------------------

def rho_psi_conditional(state: ModelState) -> Gaussian:
    """Untruncated (mean, variance) of rho_psi; None-like (nan) when all lagged psi are zero."""
    psi = state.temporal.psi
    lagged = float(np.sum(psi[:-1] ** 2))
    if lagged == 0.0:
        return float("nan"), float("nan")
    return float(np.sum(psi[1:] * psi[:-1]) / lagged), state.hyper.sigma2_lambda / lagged


# variances ------------------------------------------------------------------

def lambda_variance_conditional(state: ModelState, ctx: GibbsContext) -> Tuple[float, float]:
    psi = state.temporal.psi
    prior = ctx.priors.sigma2_lambda
    innovations = psi[1:] - state.hyper.rho_psi * psi[:-1]
    return (ctx.n_years - 1) / 2.0 + prior.shape, 0.5 * float(np.sum(innovations ** 2)) + prior.rate


def eta_variance_conditional(state: ModelState, ctx: GibbsContext) -> Tuple[float, float]:
    prior = ctx.priors.sigma2_eta
    resid = state.temporal.gamma - _gamma_prior_mean(state, ctx)
    return ctx.n_sites * ctx.n_years / 2.0 + prior.shape, 0.5 * float(np.sum(resid ** 2)) + prior.rate


def field_variance_conditional(state: ModelState, ctx: GibbsContext, field: FieldName) -> Tuple[float, float]:
    prior = ctx.variance_prior(field)
    corr = ctx.correlation(state, field)
    resid = state.field_values(field) - state.field_mean(field)
    return ctx.n_sites / 2.0 + prior.shape, 0.5 * corr.quad(resid) + prior.rate


# decays ---------------------------------------------------------------------

def phi_log_weights(state: ModelState, ctx: GibbsContext, field: FieldName) -> np.ndarray:
    """Unnormalised log probabilities of each grid decay."""
    resid = state.field_values(field) - state.field_mean(field)
    sigma2 = state.field_variance(field)
    weights = []
    for phi in ctx.phi_grid[field]:
        corr = ctx.cache.get(phi)
        weights.append(-0.5 * corr.log_det - corr.quad(resid) / (2.0 * sigma2))
    return np.array(weights)


# site-level fields ----------------------------------------------------------

def gp_conditional_prior(state: ModelState, ctx: GibbsContext, field: FieldName, site: int) -> Gaussian:
    """Distribution of one site value given the others under the field's process."""
    corr = ctx.correlation(state, field)
    precision = corr.precision
    mean = state.field_mean(field)
    values = state.field_values(field)
    r_ii = precision[site, site]
    others = np.delete(np.arange(ctx.n_sites), site)
    shift = float(np.sum(precision[site, others] * (mean - values[others]))) / r_ii
    return mean + shift, state.field_variance(field) / r_ii


def site_intercept_conditional(state: ModelState, ctx: GibbsContext, site: int) -> Gaussian:
    t = ctx.design.t
    sigma2_eta = state.hyper.sigma2_eta
    resid = (
        state.temporal.gamma[:, site]
        - state.latents.alpha_tilde[site] * t
        - state.temporal.psi
    )
    prior_mean, prior_var = gp_conditional_prior(state, ctx, FieldName.BETA0, site)
    precision = ctx.n_years / sigma2_eta + 1.0 / prior_var
    weighted = float(resid.sum()) / sigma2_eta + prior_mean / prior_var
    mean, variance = combine_precisions(precision, weighted, "site intercept")
    return float(mean), float(variance)


def site_slope_conditional(state: ModelState, ctx: GibbsContext, site: int) -> Gaussian:
    t = ctx.design.t
    sigma2_eta = state.hyper.sigma2_eta
    resid = state.temporal.gamma[:, site] - state.latents.beta0_tilde[site] - state.temporal.psi
    prior_mean, prior_var = gp_conditional_prior(state, ctx, FieldName.ALPHA, site)
    precision = float(np.sum(t ** 2)) / sigma2_eta + 1.0 / prior_var
    weighted = float(np.sum(t * resid)) / sigma2_eta + prior_mean / prior_var
    mean, variance = combine_precisions(precision, weighted, "site slope")
    return float(mean), float(variance)


def site_rho_log_target(z: float, state: ModelState, ctx: GibbsContext, site: int) -> float:
    rho = np.tanh(z / 2.0)
    s00, s01, s11 = ctx.workspace.lag_stats()
    sse = max(s00[site] - 2.0 * rho * s01[site] + rho ** 2 * s11[site], 0.0)
    prior_mean, prior_var = gp_conditional_prior(state, ctx, FieldName.RHO, site)
    sigma2 = np.exp(state.latents.z_sig2[site])
    return float(-sse / (2.0 * sigma2) + normal_logpdf(z, prior_mean, prior_var))


def site_sigma_log_target(z: float, state: ModelState, ctx: GibbsContext, site: int) -> float:
    ws = ctx.workspace
    s00, s01, s11 = ws.lag_stats()
    rho = state.latents.rho[site]
    sse = max(s00[site] - 2.0 * rho * s01[site] + rho ** 2 * s11[site], 0.0)
    prior_mean, prior_var = gp_conditional_prior(state, ctx, FieldName.SIGMA, site)
    loglik = -0.5 * z * ws.n_transitions[site] - sse / (2.0 * np.exp(z))
    return float(loglik + normal_logpdf(z, prior_mean, prior_var))


# yearly and site-year effects ----------------------------------------------

def psi_conditional(state: ModelState, ctx: GibbsContext, year: int) -> Gaussian:
    """psi at 0-based ``year`` >= 1; the last year has no successor."""
    t = ctx.design.t
    psi = state.temporal.psi
    lat = state.latents
    sigma2_eta = state.hyper.sigma2_eta
    sigma2_lambda = state.hyper.sigma2_lambda
    rho_psi = state.hyper.rho_psi
    resid = state.temporal.gamma[year] - lat.beta0_tilde - lat.alpha_tilde * t[year]
    precision = ctx.n_sites / sigma2_eta
    weighted = float(resid.sum()) / sigma2_eta
    if year < ctx.n_years - 1:
        precision += (1.0 + rho_psi ** 2) / sigma2_lambda
        weighted += rho_psi * (psi[year - 1] + psi[year + 1]) / sigma2_lambda
    else:
        precision += 1.0 / sigma2_lambda
        weighted += rho_psi * psi[year - 1] / sigma2_lambda
    mean, variance = combine_precisions(precision, weighted, "psi")
    return float(mean), float(variance)


def gamma_conditional(state: ModelState, ctx: GibbsContext) -> Tuple[np.ndarray, np.ndarray]:
    """[T x I] means and variances; site-years outside the likelihood get their prior."""
    ws = ctx.workspace
    rho = state.latents.rho
    _check_rho(rho)
    sig2 = state.latents.sigma2_eps
    gamma = state.temporal.gamma
    n_lags = ctx.n_days - 1
    active = ws.active.astype(float)
    filtered_sum = ws.filtered(rho).sum(axis=1)  # [T x I]
    leave_out_sum = filtered_sum + n_lags * (1.0 - rho)[None, :] * gamma
    data_precision = active * n_lags * ((1.0 - rho) ** 2 / sig2)[None, :]
    data_weighted = active * leave_out_sum * ((1.0 - rho) / sig2)[None, :]
    sigma2_eta = state.hyper.sigma2_eta
    precision = data_precision + 1.0 / sigma2_eta
    weighted = data_weighted + _gamma_prior_mean(state, ctx) / sigma2_eta
    return combine_precisions(precision, weighted, "gamma")
