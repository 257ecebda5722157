"""Posterior-predictive sampling at unobserved and partially observed sites."""

import logging
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from .exceptions import DataValidationError, RescaleError
from .models.chain import ChainOutput
from .models.panel import PanelDataset
from .models.prediction import DEFAULT_INTERVAL_LEVEL, PredictiveSamples
from .models.site import SiteMeta
from .models.state import FIELD_SLOTS
from .models.variant import FIELD_ORDER, FieldName
from .preprocessing import harmonic_basis
from .spatial.kernels import CorrelationCache, default_phi, distance_matrix, distances_to
from .spatial.kriging import KrigingSystem, ordinary_kriging_weights, simple_kriging_weights
from .utils import interval, z_to_rho, z_to_variance

logger = logging.getLogger(__name__)

COINCIDENT_KM = 0.0


def _require_fitting_scale(draws: ChainOutput) -> None:
    if draws.rescaled:
        raise RescaleError("prediction needs draws on the fitting scale, not rescaled ones")


def _field_moments(draws: ChainOutput, field: FieldName, x: float, y: float):
    """Per-draw conditional mean and variance of a field at (x, y); variance 0 at an observed site."""
    field = FieldName(field)
    site_attr, _, mean_attr, variance_attr, decay_attr = FIELD_SLOTS[field]
    values = draws.site_fields[site_attr]
    means = draws.scalars[mean_attr]
    if not draws.variant.enabled(field):
        return means.copy(), np.zeros(draws.n_draws)

    d0 = distances_to(draws.sites, x, y)
    hit = np.flatnonzero(d0 <= COINCIDENT_KM)
    if hit.size:
        return values[:, hit[0]].copy(), np.zeros(draws.n_draws)

    sigma2 = draws.scalars[variance_attr]
    decays = draws.scalars[decay_attr]
    cache = CorrelationCache(draws.sites)
    cond_mean = np.empty(draws.n_draws)
    cond_var = np.empty(draws.n_draws)
    # draws sharing a decay share the kriging weights
    for phi in np.unique(decays):
        rows = np.flatnonzero(decays == phi)
        corr = cache.get(phi)
        system = KrigingSystem.from_correlation(
            0.0, 1.0, corr.matrix, np.exp(-phi * d0), np.zeros(draws.n_sites)
        )
        weights, unit_var = simple_kriging_weights(system)
        resid = values[rows] - means[rows, None]
        cond_mean[rows] = means[rows] + resid @ weights
        cond_var[rows] = sigma2[rows] * unit_var
    return cond_mean, cond_var


def krige_field_draw(
    draws: ChainOutput,
    field: Union[FieldName, str],
    x: float,
    y: float,
    rng: np.random.Generator,
    transform: bool = False,
) -> np.ndarray:
    """One draw of a field at (x, y) per retained posterior draw.

    With ``transform`` the rho and sigma fields come back as autocorrelation
    and innovation variance instead of their latent values.
    """
    _require_fitting_scale(draws)
    field = FieldName(field)
    mean, variance = _field_moments(draws, field, x, y)
    sample = mean + np.sqrt(variance) * rng.standard_normal(draws.n_draws)
    # exact at observed sites
    sample = np.where(variance > 0, sample, mean)
    if transform and field == FieldName.RHO:
        return z_to_rho(sample)
    if transform and field == FieldName.SIGMA:
        return z_to_variance(sample)
    return sample


def krige_fields(draws: ChainOutput, x: float, y: float, rng: np.random.Generator) -> Dict[FieldName, np.ndarray]:
    """The four fields at (x, y), drawn in field order from one generator."""
    return {field: krige_field_draw(draws, field, x, y, rng) for field in FIELD_ORDER}


def seed_day1(dataset: PanelDataset, x: float, y: float, year: int) -> float:
    """Ordinary-kriging estimate of the day-1 temperature of 1-based ``year`` at (x, y).

    Covariance is exponential with decay 3 / d_max over the reporting sites and
    sill equal to the variance of that day's values.
    """
    day1 = dataset.values[year - 1, 0, :]
    available = np.flatnonzero(~np.isnan(day1))
    if available.size == 0:
        raise DataValidationError(f"no site reports day 1 of year {year}; cannot seed the series")
    sites = [dataset.sites[i] for i in available]
    values = day1[available]
    d0 = distances_to(sites, x, y)
    hit = np.flatnonzero(d0 <= COINCIDENT_KM)
    if hit.size:
        return float(values[hit[0]])
    if available.size == 1:
        return float(values[0])
    sill = float(np.var(values))
    if not sill > 0:
        sill = 1.0
    phi = default_phi(sites)
    covariance = sill * np.exp(-phi * distance_matrix(sites))
    weights = ordinary_kriging_weights(covariance, sill * np.exp(-phi * d0))
    return float(weights @ values)


def _draw_indices(draws: ChainOutput, n_replicates: Optional[int]) -> np.ndarray:
    if n_replicates is None or n_replicates >= draws.n_draws:
        return np.arange(draws.n_draws)
    return np.linspace(0, draws.n_draws - 1, n_replicates).round().astype(int)


def _seasonal_mean(draws: ChainOutput, elevation: float, n_days: int) -> np.ndarray:
    """[B x n_days] fixed-effect surface at a site of the given elevation."""
    scaling = draws.scaling
    basis = harmonic_basis(draws.n_days, draws.day_of_year_offset)
    sin = scaling.sin.apply(basis.sin)[:n_days]
    cos = scaling.cos.apply(basis.cos)[:n_days]
    elev = float(scaling.elev.apply(elevation))
    s = draws.scalars
    return s["beta1"][:, None] * sin[None, :] + s["beta2"][:, None] * cos[None, :] + (s["beta3"] * elev)[:, None]


def _ar_forward(mean: np.ndarray, start: np.ndarray, rho: np.ndarray, sigma2: np.ndarray,
                rng: np.random.Generator) -> np.ndarray:
    """Run Y_l = m_l + rho (Y_{l-1} - m_{l-1}) + eps from Y_1 = start; arrays are [B x n_days]."""
    out = np.empty_like(mean)
    out[:, 0] = start
    sd = np.sqrt(sigma2)
    for day in range(1, mean.shape[1]):
        noise = sd * rng.standard_normal(mean.shape[0])
        out[:, day] = mean[:, day] + rho * (out[:, day - 1] - mean[:, day - 1]) + noise
    return out


def compose_panel(
    draws: ChainOutput,
    x: float,
    y: float,
    elevation: float,
    rng: np.random.Generator,
    dataset: Optional[PanelDataset] = None,
    years: Optional[Sequence[int]] = None,
    through_day: Optional[int] = None,
    seeds: Optional[Dict[int, float]] = None,
    site_id: str = "s0",
    n_replicates: Optional[int] = None,
) -> PredictiveSamples:
    """Composition sampling of daily series at (x, y) for the 1-based ``years``.

    Each replicate krigs the four fields from one posterior draw, draws the
    site-year effects from their prior and runs the daily autoregression from
    the day-1 seed. Seeds come from ``seeds`` or, failing that, from
    ordinary kriging over ``dataset``.
    """
    _require_fitting_scale(draws)
    years = list(years) if years is not None else list(range(1, draws.n_years + 1))
    n_days = through_day or draws.n_days
    if not 1 <= n_days <= draws.n_days:
        raise DataValidationError(f"day {n_days} outside the season of {draws.n_days} days")
    if any(not 1 <= year <= draws.n_years for year in years):
        raise DataValidationError(f"years {years} outside the fitted window 1..{draws.n_years}")
    seeds = dict(seeds or {})
    for year in years:
        if year not in seeds:
            if dataset is None:
                raise DataValidationError(f"no day-1 seed for year {year} and no dataset to krige one from")
            seeds[year] = seed_day1(dataset, x, y, year)

    view = draws.select(_draw_indices(draws, n_replicates))
    fields = krige_fields(view, x, y, rng)
    rho = z_to_rho(fields[FieldName.RHO])
    sigma2 = z_to_variance(fields[FieldName.SIGMA])
    seasonal = _seasonal_mean(view, elevation, n_days)
    t_scaled = view.scaling.t.apply(np.array(years, dtype=float))
    eta_sd = np.sqrt(view.scalars["sigma2_eta"])

    replicates = np.empty((view.n_draws, len(years), n_days))
    for a, year in enumerate(years):
        prior_mean = fields[FieldName.BETA0] + fields[FieldName.ALPHA] * t_scaled[a] + view.psi[:, year - 1]
        gamma = prior_mean + eta_sd * rng.standard_normal(view.n_draws)
        mean = seasonal + gamma[:, None]
        replicates[:, a, :] = _ar_forward(mean, np.full(view.n_draws, seeds[year]), rho, sigma2, rng)

    site = SiteMeta(id=site_id, x=x, y=y, elevation=elevation)
    return PredictiveSamples(site=site, replicates=replicates, years=years, days=list(range(1, n_days + 1)))


def compose_series(
    draws: ChainOutput,
    x: float,
    y: float,
    elevation: float,
    year: int,
    through_day: int,
    rng: np.random.Generator,
    dataset: Optional[PanelDataset] = None,
    seed: Optional[float] = None,
    site_id: str = "s0",
) -> PredictiveSamples:
    """Replicates of days 1..``through_day`` of one year at a new site."""
    seeds = {year: seed} if seed is not None else None
    return compose_panel(draws, x, y, elevation, rng, dataset=dataset, years=[year],
                         through_day=through_day, seeds=seeds, site_id=site_id)


def impute_missing(draws: ChainOutput, dataset: PanelDataset, site: Union[int, str],
                   rng: np.random.Generator) -> PredictiveSamples:
    """Replicates of the missing cells of an observed site's series.

    Every gap is filled forward from the last observed day before it, using the
    site's own stored field values and site-year effects. A gap that opens the
    season starts from the day-1 kriging seed. Years with no observation at all
    are composed from scratch.
    """
    _require_fitting_scale(draws)
    index = dataset.site_index(site) if isinstance(site, str) else int(site)
    meta = dataset.sites[index]
    if meta.id not in draws.site_ids:
        raise DataValidationError(f"site {meta.id!r} was not part of the fit")
    column = draws.site_ids.index(meta.id)
    series = dataset.series(index)
    missing = dataset.missing[:, :, index]
    years = [t + 1 for t in range(dataset.n_years) if missing[t].any()]
    B, L = draws.n_draws, dataset.n_days
    replicates = np.full((B, len(years), L), np.nan)
    cells = missing[[t - 1 for t in years]] if years else np.zeros((0, L), dtype=bool)

    if years:
        rho = z_to_rho(draws.site_fields["z_rho"][:, column])
        sd = np.sqrt(z_to_variance(draws.site_fields["z_sig2"][:, column]))
        seasonal = _seasonal_mean(draws, meta.elevation, L)

    for a, year in enumerate(years):
        t = year - 1
        if missing[t].all():
            logger.info(f"Site {meta.id} has no data in year {year}; composing it from the fitted fields")
            whole = compose_panel(draws, meta.x, meta.y, meta.elevation, rng, dataset=dataset, years=[year])
            replicates[:, a, :] = whole.replicates[:, 0, :]
            continue
        mean = seasonal + draws.gamma[:, t, column][:, None]
        previous = None
        for day in range(L):
            if not missing[t, day]:
                previous = np.full(B, series[t, day])
                continue
            if day == 0:
                value = np.full(B, seed_day1(dataset, meta.x, meta.y, year))
            else:
                noise = sd * rng.standard_normal(B)
                value = mean[:, day] + rho * (previous - mean[:, day - 1]) + noise
            replicates[:, a, day] = value
            previous = value

    return PredictiveSamples(site=meta, replicates=replicates, years=years,
                             days=list(range(1, L + 1)), cells=cells)


def yearly_averages(pred: PredictiveSamples, observed: Optional[np.ndarray] = None,
                    level: float = DEFAULT_INTERVAL_LEVEL) -> pd.DataFrame:
    """Per-year mean temperature of every replicate, summarised as mean and interval.

    When ``observed`` (the site's [T x L] series) is given, predicted cells are
    merged into it before averaging so each replicate is a completed series.
    """
    rows = []
    for a, year in enumerate(pred.years):
        cells = pred.cells[a]
        if observed is not None:
            base = np.asarray(observed, dtype=float)[year - 1, [d - 1 for d in pred.days]]
            merged = np.where(cells[None, :], pred.replicates[:, a, :], base[None, :])
            per_rep = np.nanmean(merged, axis=1)
        else:
            if not cells.any():
                continue
            per_rep = pred.replicates[:, a, cells].mean(axis=1)
        lower, upper = interval(per_rep, level=level)
        rows.append((year, float(per_rep.mean()), float(lower), float(upper)))
    return pd.DataFrame(rows, columns=["year", "mean", "lower", "upper"])


def krige_surface(draws: ChainOutput, field: Union[FieldName, str], xs: Sequence[float], ys: Sequence[float],
                  rng: np.random.Generator) -> pd.DataFrame:
    """Posterior mean of a kriged field on the grid ``xs`` x ``ys`` (rho and sigma transformed)."""
    rows: List[tuple] = []
    for gx in xs:
        for gy in ys:
            sample = krige_field_draw(draws, field, float(gx), float(gy), rng, transform=True)
            rows.append((float(gx), float(gy), float(np.mean(sample))))
    return pd.DataFrame(rows, columns=["x_km", "y_km", "mean"])
