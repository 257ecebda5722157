"""Forward simulation of the space-time model: synthetic panels with known truth."""

import logging
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .exceptions import NumericalDegeneracyError
from .models.design import ModelDesign, ScalingPolicy
from .models.panel import DEFAULT_DAY_OF_YEAR_OFFSET, PanelDataset
from .models.site import SiteMeta
from .models.state import FixedEffects, HyperState, ModelState, SiteLatents, TemporalEffects
from .models.variant import FIELD_ORDER, FieldName, ModelVariant
from .preprocessing import apply_design, design_from_layout
from .sampler.context import GibbsContext
from .spatial.kernels import default_phi, exp_correlation
from .utils import rho_to_z

logger = logging.getLogger(__name__)


class GeneratorSpec(BaseModel):
    """Truth of a synthetic panel, in units of the centred (unscaled) covariates.

    Standard deviations may be zero for noise-free data. ``field_values``
    overrides the drawn site values of a field (latent scale for rho and sigma).
    """

    model_config = ConfigDict(extra="forbid")

    sites: List[SiteMeta]
    n_years: int = Field(gt=0)
    n_days: int = Field(gt=0)
    seed: int = 0
    day_of_year_offset: int = DEFAULT_DAY_OF_YEAR_OFFSET
    first_year: Optional[int] = None
    variant: ModelVariant = Field(default_factory=ModelVariant)

    beta0: float = 25.0
    alpha: float = 0.0
    beta1: float = 10.0
    beta2: float = 0.0
    beta3: float = 0.0
    rho_y: float = 0.5
    sigma_eps: float = 3.0
    sigma_eta: float = 0.2
    sigma_lambda: float = 1.0
    rho_psi: float = 0.0
    sigma_beta0: float = 1.0
    sigma_alpha: float = 0.02
    sigma_rho: float = 0.3
    sigma_sig2: float = 0.4
    phi: Optional[float] = None
    field_values: Dict[FieldName, List[float]] = Field(default_factory=dict)

    @field_validator(
        "sigma_eps", "sigma_eta", "sigma_lambda", "sigma_beta0", "sigma_alpha", "sigma_rho", "sigma_sig2",
    )
    @classmethod
    def _non_negative(cls, value: float) -> float:
        if value < 0:
            raise ValueError("standard deviations must be >= 0")
        return value

    @model_validator(mode="after")
    def _check(self) -> "GeneratorSpec":
        if not -1.0 < self.rho_y < 1.0 or not -1.0 < self.rho_psi < 1.0:
            raise ValueError("autocorrelations must lie in (-1, 1)")
        for field, values in self.field_values.items():
            if len(values) != len(self.sites):
                raise ValueError(f"{field.value} needs one value per site")
        return self

    @property
    def decay(self) -> float:
        if self.phi is not None:
            return self.phi
        return default_phi(self.sites) if len(self.sites) > 1 else 1.0

    def field_sd(self, field: FieldName) -> float:
        return {
            FieldName.BETA0: self.sigma_beta0,
            FieldName.ALPHA: self.sigma_alpha,
            FieldName.RHO: self.sigma_rho,
            FieldName.SIGMA: self.sigma_sig2,
        }[FieldName(field)]

    def field_mean(self, field: FieldName) -> float:
        return {
            FieldName.BETA0: self.beta0,
            FieldName.ALPHA: self.alpha,
            FieldName.RHO: float(rho_to_z(self.rho_y)),
            FieldName.SIGMA: float(np.log(self.sigma_eps ** 2)) if self.sigma_eps > 0 else -np.inf,
        }[FieldName(field)]


def grid_sites(n_sites: int, spacing_km: float = 50.0, elevation_range: Tuple[float, float] = (0.0, 1000.0),
               seed: int = 0) -> List[SiteMeta]:
    """Sites on a near-square lattice with elevations drawn uniformly from ``elevation_range``."""
    rng = np.random.default_rng(seed)
    columns = int(np.ceil(np.sqrt(n_sites)))
    elevations = rng.uniform(*elevation_range, size=n_sites)
    return [
        SiteMeta(id=f"S{k + 1:02d}", x=spacing_km * (k % columns), y=spacing_km * (k // columns),
                 elevation=float(elevations[k]))
        for k in range(n_sites)
    ]


def reference_spec(sites: List[SiteMeta], n_years: int, n_days: int, seed: int = 0, **overrides) -> GeneratorSpec:
    """Truth at posterior means typical of a four-process fit to a river-basin network of daily maxima."""
    values = dict(
        beta0=25.70, alpha=0.0207, beta1=13.18, beta2=0.633, beta3=-0.0069,
        rho_y=0.691, sigma_eps=2.963, sigma_eta=0.230, sigma_lambda=0.936,
        sigma_beta0=1.492, sigma_alpha=0.0283, sigma_rho=0.339, sigma_sig2=0.404,
    )
    values.update(overrides)
    return GeneratorSpec(sites=sites, n_years=n_years, n_days=n_days, seed=seed, **values)


def _draw_field(spec: GeneratorSpec, field: FieldName, rng: np.random.Generator) -> np.ndarray:
    n = len(spec.sites)
    if field in spec.field_values:
        return np.array(spec.field_values[field], dtype=float)
    mean = spec.field_mean(field)
    sd = spec.field_sd(field)
    if not spec.variant.enabled(field) or sd == 0:
        return np.full(n, mean)
    chol = np.linalg.cholesky(exp_correlation(spec.sites, spec.decay).matrix)
    return mean + sd * chol @ rng.standard_normal(n)


def _draw_yearly(spec: GeneratorSpec, rng: np.random.Generator) -> np.ndarray:
    psi = np.zeros(spec.n_years)
    for t in range(1, spec.n_years):
        psi[t] = spec.rho_psi * psi[t - 1] + spec.sigma_lambda * rng.standard_normal()
    return psi


def _draw_site_years(spec: GeneratorSpec, fields, psi, t_centered, rng) -> np.ndarray:
    mean = (
        fields[FieldName.BETA0][None, :]
        + fields[FieldName.ALPHA][None, :] * t_centered[:, None]
        + psi[:, None]
    )
    return mean + spec.sigma_eta * rng.standard_normal(mean.shape)


def stationary_day1(mean: float, rho, sigma2):
    """Within-year stationary law of day 1: (mean, sigma2 / (1 - rho^2))."""
    rho = np.asarray(rho, dtype=float)
    if np.any(np.abs(rho) >= 1.0):
        raise NumericalDegeneracyError("the day-1 law needs |rho| < 1")
    return mean, np.asarray(sigma2, dtype=float) / (1.0 - rho ** 2)


def _run_days(mean: np.ndarray, day1: np.ndarray, rho: np.ndarray, sd: np.ndarray,
              rng: np.random.Generator) -> np.ndarray:
    """AR recursion over days; ``mean`` is [T x L x I] and ``day1`` is [T x I]."""
    T, L, I = mean.shape
    values = np.empty((T, L, I))
    values[:, 0, :] = day1
    for day in range(1, L):
        noise = sd[None, :] * rng.standard_normal((T, I))
        values[:, day, :] = mean[:, day, :] + rho[None, :] * (values[:, day - 1, :] - mean[:, day - 1, :]) + noise
    return values


def simulate_panel(spec: GeneratorSpec) -> Tuple[PanelDataset, ModelState]:
    """Draw a panel from the model and return it with its latent truth.

    The truth is expressed on the standardized fitting design of the returned
    panel: slopes are multiplied by their covariate scale.
    """
    rng = np.random.default_rng(spec.seed)
    basis, centre = design_from_layout(spec.sites, spec.n_years, spec.n_days, spec.day_of_year_offset,
                                       ScalingPolicy.CENTER)
    centred = apply_design(spec.sites, spec.n_years, basis, centre)

    fields = {field: _draw_field(spec, field, rng) for field in FIELD_ORDER}
    psi = _draw_yearly(spec, rng)
    gamma = _draw_site_years(spec, fields, psi, centred.t, rng)
    rho = np.tanh(fields[FieldName.RHO] / 2.0)
    sd = np.sqrt(np.exp(fields[FieldName.SIGMA]))

    surface = (
        spec.beta1 * centred.sin[:, None]
        + spec.beta2 * centred.cos[:, None]
        + spec.beta3 * centred.elev[None, :]
    )
    mean = surface[None, :, :] + gamma[:, None, :]
    day1_mean, day1_var = stationary_day1(mean[:, 0, :], rho, sd ** 2)
    day1 = day1_mean + np.sqrt(day1_var)[None, :] * rng.standard_normal(day1_mean.shape)
    values = _run_days(mean, day1, rho, sd, rng)

    dataset = PanelDataset(
        sites=spec.sites, values=values,
        day_of_year_offset=spec.day_of_year_offset, first_year=spec.first_year,
    )
    truth = _truth_state(spec, fields, psi, gamma)
    logger.info(f"Simulated panel T={spec.n_years}, L={spec.n_days}, I={len(spec.sites)} (seed {spec.seed})")
    return dataset, truth


def _truth_state(spec: GeneratorSpec, fields, psi, gamma) -> ModelState:
    _, scaled = design_from_layout(spec.sites, spec.n_years, spec.n_days, spec.day_of_year_offset,
                                   ScalingPolicy.STANDARDIZE)
    d_t, d_e = scaled.t.scale, scaled.elev.scale
    decay = spec.decay
    # noise-free specs carry zero variances, which HyperState would reject
    hyper = HyperState.model_construct(
        rho_psi=spec.rho_psi,
        sigma2_lambda=spec.sigma_lambda ** 2,
        sigma2_eta=spec.sigma_eta ** 2,
        sigma2_beta0=spec.sigma_beta0 ** 2,
        sigma2_alpha=(spec.sigma_alpha * d_t) ** 2,
        sigma2_rho=spec.sigma_rho ** 2,
        sigma2_sig2=spec.sigma_sig2 ** 2,
        z_rho=spec.field_mean(FieldName.RHO),
        z_sig2=spec.field_mean(FieldName.SIGMA),
        phi_beta0=decay, phi_alpha=decay, phi_rho=decay, phi_sig2=decay,
    )
    return ModelState(
        fixed=FixedEffects.model_construct(
            beta0=spec.beta0, alpha=spec.alpha * d_t, beta1=spec.beta1 * scaled.sin.scale,
            beta2=spec.beta2 * scaled.cos.scale, beta3=spec.beta3 * d_e,
        ),
        latents=SiteLatents(
            beta0_tilde=fields[FieldName.BETA0], alpha_tilde=fields[FieldName.ALPHA] * d_t,
            z_rho=fields[FieldName.RHO], z_sig2=fields[FieldName.SIGMA],
        ),
        temporal=TemporalEffects(psi=psi, gamma=gamma),
        hyper=hyper,
    )


def simulate_gamma_fields(spec: GeneratorSpec, n_replicates: int, seed: Optional[int] = None) -> np.ndarray:
    """[R x T x I] site-year effects from independent replicates of the process stage.

    Years are centred, matching ``equilibrium_covariance`` evaluated at the centred year.
    """
    rng = np.random.default_rng(spec.seed if seed is None else seed)
    t_centered = np.arange(1, spec.n_years + 1, dtype=float)
    t_centered -= t_centered.mean()
    out = np.empty((n_replicates, spec.n_years, len(spec.sites)))
    for r in range(n_replicates):
        fields = {field: _draw_field(spec, field, rng) for field in FIELD_ORDER}
        psi = _draw_yearly(spec, rng)
        out[r] = _draw_site_years(spec, fields, psi, t_centered, rng)
    return out


# prior-forward draws for joint-distribution checks ------------------------

def _inverse_gamma(rng: np.random.Generator, prior) -> float:
    return float(1.0 / rng.gamma(prior.shape, 1.0 / prior.rate))


def _gaussian(rng: np.random.Generator, prior) -> float:
    return float(prior.mean + np.sqrt(prior.variance) * rng.standard_normal())


def sample_prior_state(ctx: GibbsContext, rng: np.random.Generator) -> ModelState:
    """One draw of every parameter from its prior under the context's variant."""
    priors = ctx.priors
    variant = ctx.variant
    I, T = ctx.n_sites, ctx.n_years
    hyper_values = {name: _inverse_gamma(rng, getattr(priors, name)) for name in (
        "sigma2_lambda", "sigma2_eta", "sigma2_beta0", "sigma2_alpha", "sigma2_rho", "sigma2_sig2",
    )}
    decays = {}
    for field, name in zip(FIELD_ORDER, ("phi_beta0", "phi_alpha", "phi_rho", "phi_sig2")):
        grid = ctx.phi_grid[field]
        decays[name] = float(grid[rng.integers(len(grid))]) if ctx.phi_sampled else float(grid[0])
    if variant.pin_rho_psi_zero:
        rho_psi = 0.0
    else:
        low, high = priors.rho_psi_bounds
        rho_psi = float(rng.uniform(low, high))
    hyper = HyperState(
        rho_psi=rho_psi, z_rho=_gaussian(rng, priors.z_rho), z_sig2=_gaussian(rng, priors.z_sig2),
        **hyper_values, **decays,
    )
    fixed = FixedEffects(
        beta0=_gaussian(rng, priors.beta0), alpha=_gaussian(rng, priors.alpha),
        beta1=_gaussian(rng, priors.beta1), beta2=_gaussian(rng, priors.beta2),
        beta3=0.0 if ctx.beta3_pinned else _gaussian(rng, priors.beta3),
    )
    state = ModelState(
        fixed=fixed,
        latents=SiteLatents(beta0_tilde=np.zeros(I), alpha_tilde=np.zeros(I), z_rho=np.zeros(I), z_sig2=np.zeros(I)),
        temporal=TemporalEffects(psi=np.zeros(T), gamma=np.zeros((T, I))),
        hyper=hyper,
    )
    for field in FIELD_ORDER:
        if variant.enabled(field):
            corr = ctx.correlation(state, field)
            chol = corr.factor[0]
            draw = np.tril(chol) @ rng.standard_normal(I)
            state.set_field_values(field, state.field_mean(field) + np.sqrt(state.field_variance(field)) * draw)
        else:
            state.collapse_field(field)
    psi = np.zeros(T)
    for t in range(1, T):
        psi[t] = hyper.rho_psi * psi[t - 1] + np.sqrt(hyper.sigma2_lambda) * rng.standard_normal()
    state.temporal.psi = psi
    lat = state.latents
    mean = lat.beta0_tilde[None, :] + lat.alpha_tilde[None, :] * ctx.design.t[:, None] + psi[:, None]
    state.temporal.gamma = mean + np.sqrt(hyper.sigma2_eta) * rng.standard_normal((T, I))
    return state


def simulate_from_state(state: ModelState, design: ModelDesign, day1: np.ndarray,
                        rng: np.random.Generator) -> np.ndarray:
    """Days 2..L given the parameters and fixed day-1 values ([T x I])."""
    fixed = state.fixed
    surface = (
        fixed.beta1 * design.sin[:, None] + fixed.beta2 * design.cos[:, None] + fixed.beta3 * design.elev[None, :]
    )
    mean = surface[None, :, :] + state.temporal.gamma[:, None, :]
    return _run_days(mean, np.asarray(day1, dtype=float), state.latents.rho, np.sqrt(state.latents.sigma2_eps), rng)
