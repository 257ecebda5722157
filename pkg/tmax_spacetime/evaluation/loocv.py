# evaluation/loocv.py

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from .scores import score_site
from ..exceptions import DataValidationError, TmaxModelError
from ..models.chain import pool_chains
from ..models.config import RunConfig
from ..models.panel import PanelDataset
from ..models.reports import METRICS, LoocvResult, SiteScore
from ..models.variant import ModelVariant
from ..predictor import compose_panel
from ..sampler.chain import run_chains
from ..utils import derive_seed

logger = logging.getLogger(__name__)

LOOCV_COLUMNS = ["variant", "site"] + list(METRICS)


def run_fold(dataset: PanelDataset, config: RunConfig, variant: ModelVariant, fold: int) -> SiteScore:
    """Withhold site ``fold``, refit on the rest and score its predicted series.

    Model failures are recorded on the score rather than raised.
    """
    held = dataset.sites[fold]
    try:
        train = dataset.drop_site(fold)
        fold_seed = derive_seed(config.seed, fold)
        fold_config = config.with_overrides(variant=variant.code, pin_rho_psi_zero=variant.pin_rho_psi_zero)
        draws = pool_chains(run_chains(train, fold_config, jobs=1, base_seed=fold_seed))
        rng = np.random.default_rng(fold_seed)
        pred = compose_panel(draws, held.x, held.y, held.elevation, rng, dataset=train, site_id=held.id)
        score = score_site(pred, dataset.series(fold))
    except TmaxModelError as e:
        logger.warning(f"Fold {held.id} of {variant.code} failed: {e.message}")
        return SiteScore.failed(held.id, e.message)
    logger.info(f"{variant.label} {held.id}: RMSE {score.rmse:.3f}, CRPS {score.crps:.3f}, CVG {score.cvg:.3f}")
    return score


def _fold_job(args) -> SiteScore:
    return run_fold(*args)


def run_loocv(
    dataset: PanelDataset,
    config: RunConfig,
    variants: Sequence[Union[ModelVariant, str]],
    jobs: Optional[int] = None,
) -> LoocvResult:
    """Leave-one-site-out cross-validation of every variant.

    Fold ``i`` uses seed ``config.seed ^ i`` for every variant so variants are
    compared on common random numbers.
    """
    if dataset.n_sites < 2:
        raise DataValidationError("cross-validation needs at least two sites")
    jobs = jobs or config.jobs
    result = LoocvResult()
    for variant in variants:
        if isinstance(variant, str):
            variant = ModelVariant.parse(variant, pin_rho_psi_zero=config.pin_rho_psi_zero)
        tasks = [(dataset, config, variant, fold) for fold in range(dataset.n_sites)]
        logger.info(f"Cross-validating {variant.label} over {len(tasks)} folds")
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                scores: List[SiteScore] = list(pool.map(_fold_job, tasks))
        else:
            scores = [_fold_job(task) for task in tasks]
        result.add(variant.code, variant.label, scores)
    failures = result.failures()
    if failures:
        logger.warning(f"{len(failures)} fold(s) failed: {'; '.join(failures)}")
    return result


def loocv_frame(result: LoocvResult, with_means: bool = True) -> pd.DataFrame:
    """``variant,site,rmse,mae,crps,cvg`` rows, each variant followed by its mean row."""
    rows = []
    for code in result.variants:
        label = result.labels[code]
        for score in result.scores[code]:
            rows.append([label, score.site] + [getattr(score, m) for m in METRICS])
        if with_means:
            means = result.means(code)
            rows.append([label, "mean"] + [means[m] for m in METRICS])
    return pd.DataFrame(rows, columns=LOOCV_COLUMNS)


def loocv_summary(result: LoocvResult) -> dict:
    """Per-variant mean scores in lattice order."""
    return {result.labels[code]: result.means(code) for code in result.variants}
