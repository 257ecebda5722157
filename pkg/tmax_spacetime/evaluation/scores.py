# evaluation/scores.py

import numpy as np

from ..exceptions import ScoringError
from ..models.prediction import DEFAULT_INTERVAL_LEVEL, PredictiveSamples
from ..models.reports import SiteScore
from ..utils import interval


def crps_ensemble(replicates: np.ndarray, truth: np.ndarray) -> np.ndarray:
    """Sample CRPS of each column: mean |x_b - y| - sum_bb' |x_b - x_b'| / (2 B^2).

    The double sum uses the sorted-ensemble identity
    sum_bb' |x_b - x_b'| = 2 sum_k (2k - B - 1) x_(k).
    """
    replicates = np.asarray(replicates, dtype=float)
    truth = np.asarray(truth, dtype=float)
    B = replicates.shape[0]
    if B == 0:
        raise ValueError("CRPS needs at least one replicate")
    spread_to_truth = np.mean(np.abs(replicates - truth[None, ...]), axis=0)
    ordered = np.sort(replicates, axis=0)
    k = np.arange(1, B + 1, dtype=float).reshape((B,) + (1,) * (replicates.ndim - 1))
    pair_sum = 2.0 * np.sum((2.0 * k - B - 1.0) * ordered, axis=0)
    return spread_to_truth - pair_sum / (2.0 * B ** 2)


def score_cells(replicates: np.ndarray, truth: np.ndarray, site: str = "",
                level: float = DEFAULT_INTERVAL_LEVEL) -> SiteScore:
    """RMSE and MAE of the predictive mean, mean CRPS and interval coverage over cells.

    ``replicates`` is [B x n] and ``truth`` is [n].
    """
    replicates = np.asarray(replicates, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if replicates.ndim != 2 or replicates.shape[0] == 0:
        raise ValueError("replicates must be [B x n] with B >= 1")
    if replicates.shape[1] != truth.shape[0]:
        raise ValueError("replicates and truth cover different cells")
    if truth.size == 0:
        raise ValueError("no cells to score")
    if np.isnan(truth).any():
        raise ValueError("truth must be observed on every scored cell")
    mean = replicates.mean(axis=0)
    errors = mean - truth
    lower, upper = interval(replicates, level=level, axis=0)
    return SiteScore(
        site=site,
        rmse=float(np.sqrt(np.mean(errors ** 2))),
        mae=float(np.mean(np.abs(errors))),
        crps=float(np.mean(crps_ensemble(replicates, truth))),
        cvg=float(np.mean((truth >= lower) & (truth <= upper))),
        n_cells=int(truth.size),
    )


def score_site(pred: PredictiveSamples, truth: np.ndarray, level: float = DEFAULT_INTERVAL_LEVEL) -> SiteScore:
    """Score replicates against the observed [T x L] series of the same site.

    Only predicted cells from day 2 on with an observed value count; a site
    with none raises ScoringError.
    """
    truth = np.asarray(truth, dtype=float)
    rows = [year - 1 for year in pred.years]
    cols = [day - 1 for day in pred.days]
    aligned = truth[np.ix_(rows, cols)]
    scored = pred.cells & ~np.isnan(aligned) & (np.array(pred.days) >= 2)[None, :]
    if not scored.any():
        raise ScoringError(f"site {pred.site.id} has no observed cell from day 2 on", details={"site": pred.site.id})
    return score_cells(pred.replicates[:, scored], aligned[scored], site=pred.site.id, level=level)
