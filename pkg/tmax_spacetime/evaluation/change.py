# evaluation/change.py

from typing import Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..exceptions import DataValidationError
from ..models.panel import PanelDataset
from ..models.prediction import PredictiveSamples
from ..models.reports import ChangeSummary
from ..utils import interval

Window = Tuple[int, int]


def _window_rows(window: Window, years: Sequence[int]) -> np.ndarray:
    start, end = window
    rows = np.flatnonzero([start <= year <= end for year in years])
    if rows.size == 0:
        raise DataValidationError(f"window {start}-{end} holds no years")
    return rows


def _moments(values: np.ndarray) -> Tuple[float, float]:
    values = values[~np.isnan(values)]
    if values.size < 2:
        raise DataValidationError("a window needs at least two observed values")
    return float(values.mean()), float(values.std(ddof=1))


def change_summary(
    source: Union[np.ndarray, PredictiveSamples],
    window1: Window,
    window2: Window,
    site: str = "",
    years: Optional[Sequence[int]] = None,
) -> ChangeSummary:
    """Difference of window means and quotient of window sds.

    ``source`` is either an observed [T x L] series (``years`` labels its rows,
    1..T by default) or predictive replicates, in which case the posterior
    sample of the mean difference is returned as well.
    """
    if isinstance(source, PredictiveSamples):
        rows1 = _window_rows(window1, source.years)
        rows2 = _window_rows(window2, source.years)
        reps = np.where(source.cells[None, :, :], source.replicates, np.nan)
        first = reps[:, rows1, :].reshape(source.n_replicates, -1)
        second = reps[:, rows2, :].reshape(source.n_replicates, -1)
        delta = np.nanmean(second, axis=1) - np.nanmean(first, axis=1)
        q_sd = np.nanstd(second, axis=1, ddof=1) / np.nanstd(first, axis=1, ddof=1)
        lower, upper = interval(delta)
        return ChangeSummary(
            site=site or source.site.id,
            window1=list(window1),
            window2=list(window2),
            delta_mean=float(delta.mean()),
            q_sd=float(np.mean(q_sd)),
            delta_samples=delta,
            delta_interval=[float(lower), float(upper)],
            prob_positive=float(np.mean(delta > 0)),
        )

    series = np.asarray(source, dtype=float)
    years = list(years) if years is not None else list(range(1, series.shape[0] + 1))
    mean1, sd1 = _moments(series[_window_rows(window1, years)].ravel())
    mean2, sd2 = _moments(series[_window_rows(window2, years)].ravel())
    if not sd1 > 0:
        raise DataValidationError(f"window {window1} has zero spread; the sd quotient is undefined")
    return ChangeSummary(
        site=site, window1=list(window1), window2=list(window2),
        delta_mean=mean2 - mean1, q_sd=sd2 / sd1,
    )


def change_table(dataset: PanelDataset, window1: Window, window2: Window) -> pd.DataFrame:
    """Per-site window means and sds with their change, windows in calendar years when known."""
    years = [dataset.year_label(t) for t in range(1, dataset.n_years + 1)]
    rows = []
    for index, site in enumerate(dataset.sites):
        series = dataset.series(index)
        mean1, sd1 = _moments(series[_window_rows(window1, years)].ravel())
        mean2, sd2 = _moments(series[_window_rows(window2, years)].ravel())
        rows.append({
            "site": site.id,
            "elev_m": site.elevation,
            "mean1": mean1,
            "sd1": sd1,
            "mean2": mean2,
            "sd2": sd2,
            "delta_mean": mean2 - mean1,
            "q_sd": sd2 / sd1 if sd1 > 0 else float("nan"),
        })
    return pd.DataFrame(rows)
