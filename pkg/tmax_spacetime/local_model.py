"""Independent single-site models and their agreement with the full spatial fit."""

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Mapping, Optional, Sequence, Union

import numpy as np
import pandas as pd

from .exceptions import DataValidationError, SiteMismatchError
from .models.chain import ChainOutput, pool_chains
from .models.config import RunConfig
from .models.design import ScalingPolicy
from .models.panel import PanelDataset
from .models.reports import LocalState
from .preprocessing import rescale_posterior
from .sampler.chain import run_chains
from .utils import interval, z_to_rho, z_to_variance

logger = logging.getLogger(__name__)

LOCAL_VARIANT = "M0"
COMPARED_PARAMETERS = ("alpha", "rho_y", "sigma_eps")
OVERLAP_COLUMNS = ["site", "parameter", "local_lower", "local_upper", "full_lower", "full_upper", "overlap"]


def local_config(config: RunConfig) -> RunConfig:
    """The run configuration of a local fit: no spatial fields, iid years, raw covariates."""
    return config.with_overrides(variant=LOCAL_VARIANT, pin_rho_psi_zero=True, scaling=ScalingPolicy.NONE)


def fit_local(dataset: PanelDataset, site: Union[int, str], config: RunConfig,
              jobs: Optional[int] = None) -> List[ChainOutput]:
    """Fit the single-site model to one complete series.

    This is the spatial engine run on a one-site panel, so it shares every
    update kernel with the full model.
    """
    index = dataset.site_index(site) if isinstance(site, str) else int(site)
    site_id = dataset.sites[index].id
    if dataset.missing[:, :, index].any():
        count = int(dataset.missing[:, :, index].sum())
        raise DataValidationError(f"site {site_id!r} has {count} missing day(s); the local model needs a complete series")
    single = dataset.select_sites([index])
    logger.info(f"Fitting local model at {site_id}")
    return run_chains(single, local_config(config), jobs=jobs)


def _local_job(args) -> List[ChainOutput]:
    dataset, site, config = args
    return fit_local(dataset, site, config, jobs=1)


def fit_local_all(dataset: PanelDataset, config: RunConfig, sites: Optional[Sequence[str]] = None,
                  jobs: Optional[int] = None) -> Dict[str, ChainOutput]:
    """Pooled local fits of every complete site (or ``sites``), one worker per site."""
    jobs = jobs or config.jobs
    if sites is None:
        complete = ~dataset.missing.any(axis=(0, 1))
        sites = [s.id for s, ok in zip(dataset.sites, complete) if ok]
        skipped = dataset.n_sites - len(sites)
        if skipped:
            logger.warning(f"Skipping {skipped} site(s) with missing days")
    tasks = [(dataset, site_id, config) for site_id in sites]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_local_job, tasks))
    else:
        results = [_local_job(task) for task in tasks]
    return {site_id: pool_chains(chains) for site_id, chains in zip(sites, results)}


def local_state_at(output: ChainOutput, k: int) -> LocalState:
    """Parameters of retained draw ``k`` of a local fit."""
    if output.n_sites != 1:
        raise ValueError("a local fit holds exactly one site")
    return LocalState(
        beta0=float(output.site_fields["beta0_tilde"][k, 0]),
        alpha=float(output.site_fields["alpha_tilde"][k, 0]),
        beta1=float(output.scalars["beta1"][k]),
        beta2=float(output.scalars["beta2"][k]),
        rho_y=float(z_to_rho(output.site_fields["z_rho"][k, 0])),
        sigma2_lambda=float(output.scalars["sigma2_lambda"][k]),
        sigma2_eps=float(z_to_variance(output.site_fields["z_sig2"][k, 0])),
        psi=output.psi[k],
    )


def _site_draws(output: ChainOutput, i: int) -> Dict[str, np.ndarray]:
    fields = output.site_fields
    return {
        "alpha": fields["alpha_tilde"][:, i],
        "rho_y": z_to_rho(fields["z_rho"][:, i]),
        "sigma_eps": np.sqrt(z_to_variance(fields["z_sig2"][:, i])),
    }


def interval_overlap(a_lower: float, a_upper: float, b_lower: float, b_upper: float) -> float:
    """Length of the intersection of two intervals over the length of their union."""
    union = max(a_upper, b_upper) - min(a_lower, b_lower)
    if union <= 0:
        # both intervals collapse onto one point
        return 1.0
    intersection = max(0.0, min(a_upper, b_upper) - max(a_lower, b_lower))
    return float(intersection / union)


def _original_units(output: ChainOutput) -> ChainOutput:
    if output.rescaled or output.scaling.is_identity:
        return output
    return rescale_posterior(output, intercept="raw")


def compare_local_vs_full(local_fits: Mapping[str, ChainOutput], full: ChainOutput,
                          level: float = 0.90) -> pd.DataFrame:
    """Per-site overlap of local and full posterior intervals for the year slope,
    the autocorrelation and the innovation sd. Intercepts are not compared.
    """
    if set(local_fits) != set(full.site_ids):
        missing = sorted(set(full.site_ids) - set(local_fits))
        extra = sorted(set(local_fits) - set(full.site_ids))
        raise SiteMismatchError(
            "local and full fits cover different sites",
            details={"missing_local": missing, "unknown_local": extra},
        )
    full = _original_units(full)
    rows = []
    for i, site_id in enumerate(full.site_ids):
        local_draws = _site_draws(_original_units(local_fits[site_id]), 0)
        full_draws = _site_draws(full, i)
        for name in COMPARED_PARAMETERS:
            lo_l, hi_l = interval(local_draws[name], level=level)
            lo_f, hi_f = interval(full_draws[name], level=level)
            rows.append([site_id, name, float(lo_l), float(hi_l), float(lo_f), float(hi_f),
                         interval_overlap(lo_l, hi_l, lo_f, hi_f)])
    table = pd.DataFrame(rows, columns=OVERLAP_COLUMNS)
    logger.info(f"Median interval overlap over {len(full.site_ids)} site(s): {table['overlap'].median():.3f}")
    return table
