# sampler/chain.py

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional

import numpy as np

from .context import GibbsContext
from .tuner import MhTuner, initial_proposal_sd
from .updates import (
    update_gamma,
    update_global_means,
    update_phi_discrete,
    update_psi,
    update_rho_psi,
    update_site_gaussian_fields,
    update_site_latents_mh,
    update_variances,
)
from ..exceptions import NonFiniteStateError
from ..models.chain import FIXED_NAMES, SCALAR_NAMES, SITE_FIELD_NAMES, ChainOutput, site_field_key
from ..models.config import ChainSettings, RunConfig, chain_settings
from ..models.design import ModelDesign
from ..models.panel import PanelDataset
from ..models.priors import HyperPriors
from ..models.state import (
    FIELD_SLOTS,
    FixedEffects,
    HyperState,
    ModelState,
    SiteLatents,
    TemporalEffects,
)
from ..models.variant import FIELD_ORDER, FieldName, ModelVariant
from ..preprocessing import make_design
from ..spatial.kernels import default_phi
from ..utils import rho_to_z

logger = logging.getLogger(__name__)

RHO_INIT_BOUND = 0.95
SIGMA2_INIT_FLOOR = 1e-6


def _initial_decay(ctx: GibbsContext, field: FieldName) -> float:
    grid = ctx.phi_grid[field]
    if len(grid) == 1 or ctx.n_sites < 2:
        return float(grid[0])
    target = default_phi(ctx.dataset.sites)
    return float(grid[np.argmin(np.abs(np.log(grid) - np.log(target)))])


def _pooled_ols(ctx: GibbsContext) -> np.ndarray:
    """Least squares of Y on [1, t, sin, cos, elev] over the complete site-years."""
    ws = ctx.workspace
    design = ctx.design
    T, L, I = ws.values.shape
    columns = [
        np.ones((T, L, I)),
        np.broadcast_to(design.t[:, None, None], (T, L, I)),
        np.broadcast_to(design.sin[None, :, None], (T, L, I)),
        np.broadcast_to(design.cos[None, :, None], (T, L, I)),
    ]
    if not ctx.beta3_pinned:
        columns.append(np.broadcast_to(design.elev[None, None, :], (T, L, I)))
    keep = np.broadcast_to(ws.active[:, None, :], (T, L, I))
    A = np.stack([c[keep] for c in columns], axis=1)
    coef, *_ = np.linalg.lstsq(A, ws.values[keep], rcond=None)
    if ctx.beta3_pinned:
        coef = np.append(coef, 0.0)
    return coef


def initialize_state(ctx: GibbsContext) -> ModelState:
    """Deterministic starting point from pooled least squares and per-site residual moments.

    Disabled fields start at the pooled estimate; enabled ones at their per-site
    values with the global mean set to the site average. psi starts at zero,
    gamma at its prior mean and variances at their prior means.
    """
    ws = ctx.workspace
    variant = ctx.variant
    T, L, I = ws.values.shape
    b0, a, b1, b2, b3 = _pooled_ols(ctx)
    design = ctx.design

    fitted = (
        b0 + a * design.t[:, None, None] + b1 * design.sin[None, :, None]
        + b2 * design.cos[None, :, None] + b3 * design.elev[None, None, :]
    )
    resid = (ws.values - fitted) * ws.mask3()
    n_years = np.maximum(ws.n_active, 1.0)

    head, tail = resid[:, 1:, :], resid[:, :-1, :]
    s01 = np.einsum("tli,tli->i", head, tail)
    s11 = np.einsum("tli,tli->i", tail, tail)
    site_rho = np.divide(s01, s11, out=np.zeros(I), where=s11 > 0)
    site_rho = np.clip(site_rho, -RHO_INIT_BOUND, RHO_INIT_BOUND)
    innovations = (head - site_rho[None, None, :] * tail) ** 2
    n_trans = np.maximum(ws.n_transitions, 1.0)
    site_sig2 = np.maximum(np.einsum("tli->i", innovations) / n_trans, SIGMA2_INIT_FLOOR)
    has_data = ws.n_active > 0

    pooled_rho = float(np.clip(s01.sum() / s11.sum(), -RHO_INIT_BOUND, RHO_INIT_BOUND)) if s11.sum() > 0 else 0.0
    pooled_sig2 = max(float(innovations.sum() / max(ws.n_transitions.sum(), 1.0)), SIGMA2_INIT_FLOOR)
    site_rho = np.where(has_data, site_rho, pooled_rho)
    site_sig2 = np.where(has_data, site_sig2, pooled_sig2)

    site_mean = resid.sum(axis=(0, 1)) / (n_years * L)
    beta0_tilde = np.full(I, b0) + (site_mean if variant.beta0 else 0.0)
    z_rho = rho_to_z(site_rho) if variant.rho else np.full(I, float(rho_to_z(pooled_rho)))
    z_sig2 = np.log(site_sig2) if variant.sigma else np.full(I, np.log(pooled_sig2))

    latents = SiteLatents(beta0_tilde=beta0_tilde, alpha_tilde=np.full(I, a), z_rho=z_rho, z_sig2=z_sig2)
    priors = ctx.priors
    hyper = HyperState(
        rho_psi=0.0,
        sigma2_lambda=priors.sigma2_lambda.mean,
        sigma2_eta=priors.sigma2_eta.mean,
        sigma2_beta0=priors.sigma2_beta0.mean,
        sigma2_alpha=priors.sigma2_alpha.mean,
        sigma2_rho=priors.sigma2_rho.mean,
        sigma2_sig2=priors.sigma2_sig2.mean,
        z_rho=float(np.mean(z_rho)),
        z_sig2=float(np.mean(z_sig2)),
        **{FIELD_SLOTS[field][4]: _initial_decay(ctx, field) for field in FIELD_ORDER},
    )
    psi = np.zeros(T)
    gamma = latents.beta0_tilde[None, :] + latents.alpha_tilde[None, :] * design.t[:, None] + psi[:, None]
    state = ModelState(
        fixed=FixedEffects(beta0=float(np.mean(beta0_tilde)), alpha=float(a), beta1=float(b1),
                           beta2=float(b2), beta3=float(b3)),
        latents=latents,
        temporal=TemporalEffects(psi=psi, gamma=gamma),
        hyper=hyper,
    )
    state.check_invariants()
    return state


def make_tuner(state: ModelState, ctx: GibbsContext, settings: ChainSettings) -> MhTuner:
    """Proposal sds sized from each site's transition count; a pooled slot 0 for disabled fields."""
    ws = ctx.workspace
    initial = initial_proposal_sd(ws.n_transitions, state.latents.rho)
    pooled = initial_proposal_sd(np.array([ws.n_transitions.sum()]), np.array([np.tanh(state.hyper.z_rho / 2.0)]))
    for family, field in (("z_rho", FieldName.RHO), ("z_sig2", FieldName.SIGMA)):
        if not ctx.variant.enabled(field):
            initial[family] = np.full_like(initial[family], pooled[family][0])
    return MhTuner(initial, window=settings.mh_window, factor=settings.mh_factor)


def gibbs_sweep(state: ModelState, ctx: GibbsContext, tuner: MhTuner, rng: np.random.Generator) -> ModelState:
    """One pass over every block in the fixed scan order."""
    ctx.workspace.refresh(state)
    update_global_means(state, ctx, tuner, rng)
    update_rho_psi(state, ctx, rng)
    update_variances(state, ctx, rng)
    update_phi_discrete(state, ctx, rng)
    update_site_gaussian_fields(state, ctx, rng)
    update_site_latents_mh(state, ctx, tuner, rng)
    update_psi(state, ctx, rng)
    update_gamma(state, ctx, rng)
    return state


def held_parameters(ctx: GibbsContext) -> List[str]:
    """Names the chain keeps fixed or collapsed, excluded from diagnostics."""
    held = []
    for field in FIELD_ORDER:
        site_attr, _, _, variance, decay = FIELD_SLOTS[field]
        if not ctx.variant.enabled(field):
            held += [site_field_key(site_attr), variance, decay]
        elif not ctx.phi_sampled:
            held.append(decay)
    if ctx.beta3_pinned:
        held.append("beta3")
    if ctx.variant.pin_rho_psi_zero:
        held.append("rho_psi")
    if ctx.n_years < 2:
        held += ["psi", "rho_psi", "sigma2_lambda"]
    return sorted(set(held))


class _DrawBuffer:
    """Preallocated storage for the retained draws."""

    def __init__(self, n: int, n_years: int, n_sites: int):
        self.iterations = np.zeros(n, dtype=int)
        self.scalars = {name: np.zeros(n) for name in SCALAR_NAMES}
        self.site_fields = {name: np.zeros((n, n_sites)) for name in SITE_FIELD_NAMES}
        self.psi = np.zeros((n, n_years))
        self.gamma = np.zeros((n, n_years, n_sites))
        self.count = 0

    def store(self, iteration: int, state: ModelState) -> None:
        k = self.count
        self.iterations[k] = iteration
        for name in FIXED_NAMES:
            self.scalars[name][k] = getattr(state.fixed, name)
        for name in SCALAR_NAMES:
            if name not in FIXED_NAMES:
                self.scalars[name][k] = getattr(state.hyper, name)
        for name in SITE_FIELD_NAMES:
            self.site_fields[name][k] = getattr(state.latents, name)
        self.psi[k] = state.temporal.psi
        self.gamma[k] = state.temporal.gamma
        self.count += 1


def run_chain(
    dataset: PanelDataset,
    priors: HyperPriors,
    variant: ModelVariant,
    settings: ChainSettings,
    design: Optional[ModelDesign] = None,
    drop_rule: str = "site-year",
    initial_state: Optional[ModelState] = None,
) -> ChainOutput:
    """Run one Metropolis-within-Gibbs chain and return its thinned draws.

    A draw is kept when ``iteration > burn_in`` and ``(iteration - burn_in) % thin == 0``.
    Proposal adaptation stops at the end of burn-in. The result depends only
    on ``settings.seed``.
    """
    design = design or make_design(dataset)
    ctx = GibbsContext(dataset, design, priors, variant, drop_rule=drop_rule)
    state = initial_state.copy() if initial_state is not None else initialize_state(ctx)
    tuner = make_tuner(state, ctx, settings)
    rng = np.random.default_rng(settings.seed)
    buffer = _DrawBuffer(settings.n_draws, ctx.n_years, ctx.n_sites)

    logger.info(
        f"Chain {settings.chain_index}: variant {variant.code}, {settings.iterations} iterations "
        f"(burn-in {settings.burn_in}, thin {settings.thin}), seed {settings.seed}"
    )
    if settings.burn_in == 0:
        tuner.freeze()
    for iteration in range(1, settings.iterations + 1):
        gibbs_sweep(state, ctx, tuner, rng)
        bad = state.non_finite()
        if bad:
            raise NonFiniteStateError(f"non-finite {', '.join(bad)}", iteration=iteration)
        tuner.end_iteration(iteration)
        if iteration == settings.burn_in:
            tuner.freeze()
        if iteration > settings.burn_in and (iteration - settings.burn_in) % settings.thin == 0:
            buffer.store(iteration, state)

    report = tuner.report()
    logger.info(
        f"Chain {settings.chain_index} finished with {buffer.count} draws; acceptance "
        + ", ".join(f"{f}={report.mean_rate(f):.3f}" for f in report.rates)
    )
    return ChainOutput(
        chain_index=settings.chain_index,
        seed=settings.seed,
        iterations=settings.iterations,
        burn_in=settings.burn_in,
        thin=settings.thin,
        variant=variant,
        sites=list(dataset.sites),
        scaling=design.scaling,
        n_years=ctx.n_years,
        n_days=ctx.n_days,
        day_of_year_offset=dataset.day_of_year_offset,
        first_year=dataset.first_year,
        draw_iterations=buffer.iterations[:buffer.count],
        scalars={k: v[:buffer.count] for k, v in buffer.scalars.items()},
        site_fields={k: v[:buffer.count] for k, v in buffer.site_fields.items()},
        psi=buffer.psi[:buffer.count],
        gamma=buffer.gamma[:buffer.count],
        acceptance=report,
        held=held_parameters(ctx),
    )


def _chain_job(args) -> ChainOutput:
    dataset, config, index, base_seed = args
    settings = chain_settings(config, index, base_seed)
    design = make_design(dataset, config.scaling)
    return run_chain(dataset, config.priors, config.model_variant, settings,
                     design=design, drop_rule=config.drop_rule)


def run_chains(dataset: PanelDataset, config: RunConfig, jobs: Optional[int] = None,
               base_seed: Optional[int] = None) -> List[ChainOutput]:
    """All chains of a run, in chain-index order, optionally in worker processes."""
    jobs = jobs or config.jobs
    tasks = [(dataset, config, index, base_seed) for index in range(config.chains)]
    if jobs <= 1 or config.chains == 1:
        return [_chain_job(task) for task in tasks]
    logger.info(f"Running {config.chains} chains on {jobs} worker processes")
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_chain_job, tasks))
