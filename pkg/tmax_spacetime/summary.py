"""Posterior summaries in the reporting layout and empirical seasonal profiles."""

import logging
from typing import Dict

import numpy as np
import pandas as pd

from .models.chain import ChainOutput, site_field_key
from .models.panel import PanelDataset
from .models.reports import ParameterSummary
from .preprocessing import harmonic_basis, rescale_posterior
from .utils import z_to_rho, z_to_variance

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = ["parameter", "mean", "q05", "q95"]

# reported name -> (stored scalar, transform)
GLOBAL_PARAMETERS = {
    "beta0": ("beta0", None),
    "alpha": ("alpha", None),
    "beta1": ("beta1", None),
    "beta2": ("beta2", None),
    "beta3": ("beta3", None),
    "rho_y": ("z_rho", z_to_rho),
    "sigma_eps": ("z_sig2", lambda z: np.sqrt(z_to_variance(z))),
    "sigma_eta": ("sigma2_eta", np.sqrt),
    "sigma_lambda": ("sigma2_lambda", np.sqrt),
    "rho_psi": ("rho_psi", None),
    "sigma_beta0": ("sigma2_beta0", np.sqrt),
    "sigma_alpha": ("sigma2_alpha", np.sqrt),
    "sigma_rho": ("sigma2_rho", np.sqrt),
    "sigma_sig2": ("sigma2_sig2", np.sqrt),
}

SITE_PARAMETERS = {
    "beta0_site": "beta0_tilde",
    "alpha": "alpha_tilde",
    "rho_y": "z_rho",
    "sigma_eps": "z_sig2",
}


def _site_values(draws: ChainOutput, name: str, i: int) -> np.ndarray:
    values = draws.site_fields[SITE_PARAMETERS[name]][:, i]
    if name == "beta0_site":
        return values - draws.scalars["beta0"]
    if name == "rho_y":
        return z_to_rho(values)
    if name == "sigma_eps":
        return np.sqrt(z_to_variance(values))
    return values


def posterior_summary(draws: ChainOutput, intercept: str = "centered") -> Dict[str, ParameterSummary]:
    """Posterior mean and 5/95 percentiles of every sampled quantity, in original units.

    Global parameters come first in reporting order, then one entry per site and
    enabled field, named ``<parameter>[<site id>]``. ``beta0_site`` is the site
    deviation from the global intercept.
    """
    if not draws.rescaled:
        draws = rescale_posterior(draws, intercept=intercept)
    held = set(draws.held)
    out: Dict[str, ParameterSummary] = {}
    for name, (stored, transform) in GLOBAL_PARAMETERS.items():
        if stored in held:
            continue
        values = draws.scalars[stored]
        out[name] = ParameterSummary.from_samples(transform(values) if transform else values)
    for name, stored in SITE_PARAMETERS.items():
        if site_field_key(stored) in held:
            continue
        for i, site_id in enumerate(draws.site_ids):
            out[f"{name}[{site_id}]"] = ParameterSummary.from_samples(_site_values(draws, name, i))
    return out


def summary_frame(summary: Dict[str, ParameterSummary]) -> pd.DataFrame:
    rows = [[name, s.mean, s.q05, s.q95] for name, s in summary.items()]
    return pd.DataFrame(rows, columns=SUMMARY_COLUMNS)


def seasonal_profile(dataset: PanelDataset) -> pd.DataFrame:
    """Day-of-season mean of each site over the observed years, centred on the site mean.

    Columns ``site,day,mean``; days with no observation at a site are NaN.
    """
    observed = np.where(dataset.missing, np.nan, dataset.values)
    counts = (~dataset.missing).sum(axis=0)
    sums = np.nansum(observed, axis=0)
    profile = np.divide(sums, counts, out=np.full(sums.shape, np.nan), where=counts > 0)
    profile = profile - np.nanmean(profile, axis=0, keepdims=True)
    days = np.arange(1, dataset.n_days + 1)
    frames = [
        pd.DataFrame({"site": site.id, "day": days, "mean": profile[:, i]})
        for i, site in enumerate(dataset.sites)
    ]
    return pd.concat(frames, ignore_index=True)


def harmonic_fit_r2(dataset: PanelDataset) -> Dict[str, float]:
    """Share of the variance of each site's seasonal profile explained by one annual harmonic."""
    profile = seasonal_profile(dataset)
    basis = harmonic_basis(dataset.n_days, dataset.day_of_year_offset)
    A = np.column_stack([np.ones(dataset.n_days), basis.sin, basis.cos])
    out = {}
    for site_id, group in profile.groupby("site", sort=False):
        y = group["mean"].to_numpy()
        keep = np.isfinite(y)
        if keep.sum() < 4:
            out[site_id] = float("nan")
            continue
        coef, *_ = np.linalg.lstsq(A[keep], y[keep], rcond=None)
        resid = y[keep] - A[keep] @ coef
        total = np.sum((y[keep] - y[keep].mean()) ** 2)
        out[site_id] = float(1.0 - resid @ resid / total) if total > 0 else float("nan")
    return out
