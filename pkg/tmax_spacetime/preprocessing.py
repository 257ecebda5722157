"""Covariate design and back-transformation of posterior draws to original units."""

import logging
from typing import List, Tuple, Union

import numpy as np

from .exceptions import EmptyPanelError, RescaleError
from .models.chain import ChainOutput
from .models.design import AffineScale, CovariateScaling, HarmonicBasis, ModelDesign, ScalingPolicy
from .models.panel import PanelDataset
from .models.site import SiteMeta

logger = logging.getLogger(__name__)

DAYS_PER_CYCLE = 365.0


def harmonic_basis(n_days: int, day_of_year_offset: int) -> HarmonicBasis:
    """sin and cos of 2 pi (l + offset) / 365 for l = 1..L."""
    if n_days <= 0:
        raise EmptyPanelError("no days in the season")
    day = np.arange(1, n_days + 1, dtype=float) + day_of_year_offset
    angle = 2.0 * np.pi * day / DAYS_PER_CYCLE
    return HarmonicBasis(sin=np.sin(angle), cos=np.cos(angle), day_of_year_offset=day_of_year_offset)


def _affine(values: np.ndarray, policy: ScalingPolicy) -> AffineScale:
    if policy == ScalingPolicy.NONE:
        return AffineScale()
    center = float(np.mean(values))
    if policy == ScalingPolicy.CENTER:
        return AffineScale(center=center)
    scale = float(np.std(values))
    if not scale > 0:
        scale = 1.0
    return AffineScale(center=center, scale=scale)


def design_from_layout(
    sites: List[SiteMeta],
    n_years: int,
    n_days: int,
    day_of_year_offset: int,
    policy: Union[ScalingPolicy, str] = ScalingPolicy.STANDARDIZE,
) -> Tuple[HarmonicBasis, CovariateScaling]:
    if n_years <= 0 or n_days <= 0 or not sites:
        raise EmptyPanelError(f"empty panel: T={n_years}, L={n_days}, I={len(sites)}")
    policy = ScalingPolicy(policy)
    basis = harmonic_basis(n_days, day_of_year_offset)
    years = np.arange(1, n_years + 1, dtype=float)
    elevations = np.array([site.elevation for site in sites], dtype=float)
    scaling = CovariateScaling(
        t=_affine(years, policy),
        sin=_affine(basis.sin, policy),
        cos=_affine(basis.cos, policy),
        elev=_affine(elevations, policy),
        policy=policy,
    )
    return basis, scaling


def build_design(
    dataset: PanelDataset,
    policy: Union[ScalingPolicy, str] = ScalingPolicy.STANDARDIZE,
) -> Tuple[HarmonicBasis, CovariateScaling]:
    """Harmonic basis and the centring/scaling record of {t, sin, cos, elev}."""
    return design_from_layout(
        dataset.sites, dataset.n_years, dataset.n_days, dataset.day_of_year_offset, policy
    )


def apply_design(
    sites: List[SiteMeta],
    n_years: int,
    basis: HarmonicBasis,
    scaling: CovariateScaling,
) -> ModelDesign:
    """Covariates on the fitting scale under an existing scaling record."""
    years = np.arange(1, n_years + 1, dtype=float)
    elevations = np.array([site.elevation for site in sites], dtype=float)
    return ModelDesign(
        basis=basis,
        scaling=scaling,
        t=scaling.t.apply(years),
        sin=scaling.sin.apply(basis.sin),
        cos=scaling.cos.apply(basis.cos),
        elev=scaling.elev.apply(elevations),
    )


def make_design(
    dataset: PanelDataset,
    policy: Union[ScalingPolicy, str] = ScalingPolicy.STANDARDIZE,
) -> ModelDesign:
    basis, scaling = build_design(dataset, policy)
    return apply_design(dataset.sites, dataset.n_years, basis, scaling)


def rescale_posterior(
    draws: ChainOutput,
    scaling: CovariateScaling = None,
    intercept: str = "raw",
) -> ChainOutput:
    """Back-transform draws fitted on the scaled design into original units.

    Slopes (alpha, beta1..beta3, the site slopes) are divided by their covariate
    scale and sigma2_alpha by the squared year scale. With ``intercept="raw"``
    the intercepts (and gamma, which carries them) are moved to covariates
    equal to zero; ``intercept="centered"`` keeps them at the covariate means.
    """
    if draws.rescaled:
        raise RescaleError("draws are already in original units")
    if intercept not in ("raw", "centered"):
        raise ValueError(f"intercept must be 'raw' or 'centered', got {intercept!r}")
    scaling = scaling or draws.scaling

    scalars = {k: v.copy() for k, v in draws.scalars.items()}
    fields = {k: v.copy() for k, v in draws.site_fields.items()}
    gamma = draws.gamma.copy()

    d_t, c_t = scaling.t.scale, scaling.t.center
    beta1, beta2, beta3 = draws.scalars["beta1"], draws.scalars["beta2"], draws.scalars["beta3"]

    scalars["alpha"] = draws.scalars["alpha"] / d_t
    scalars["beta1"] = beta1 / scaling.sin.scale
    scalars["beta2"] = beta2 / scaling.cos.scale
    scalars["beta3"] = beta3 / scaling.elev.scale
    scalars["sigma2_alpha"] = draws.scalars["sigma2_alpha"] / d_t ** 2
    fields["alpha_tilde"] = draws.site_fields["alpha_tilde"] / d_t

    if intercept == "raw":
        offset = (
            scalars["beta1"] * scaling.sin.center
            + scalars["beta2"] * scaling.cos.center
            + scalars["beta3"] * scaling.elev.center
        )
        scalars["beta0"] = draws.scalars["beta0"] - scalars["alpha"] * c_t - offset
        fields["beta0_tilde"] = draws.site_fields["beta0_tilde"] - fields["alpha_tilde"] * c_t - offset[:, None]
        gamma = gamma - offset[:, None, None]

    logger.info(f"Rescaled {draws.n_draws} draws of chain {draws.chain_index} (intercept={intercept})")
    return draws.model_copy(update={
        "scalars": scalars,
        "site_fields": fields,
        "gamma": gamma,
        "rescaled": True,
        "intercept_mode": intercept,
    })
