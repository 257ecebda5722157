# resources/prediction.py

from typing import Optional, Sequence, Union

import numpy as np
import pandas as pd

from .base import SessionResource
from ..models.prediction import PredictiveSamples
from ..models.variant import FieldName
from ..predictor import compose_panel, compose_series, impute_missing, krige_surface, yearly_averages


class Prediction(SessionResource):
    """Posterior-predictive series at new sites and imputation at observed ones."""

    stream = 1

    def _year_index(self, year: int) -> int:
        return self.dataset.year_index(year) if self._session.dataset is not None else int(year)

    def predict(self, x: float, y: float, elevation: float, year: Optional[int] = None,
                through_day: Optional[int] = None, site_id: str = "s0",
                n_replicates: Optional[int] = None, seed: Optional[int] = None) -> PredictiveSamples:
        """Series at (x, y); one year through ``through_day``, or every fitted year when ``year`` is None.

        ``year`` is a calendar year when the panel knows its first year.
        """
        rng = self.rng(seed)
        dataset = self._session.dataset
        if year is None:
            return compose_panel(self.draws, x, y, elevation, rng, dataset=dataset,
                                 through_day=through_day, site_id=site_id, n_replicates=n_replicates)
        index = self._year_index(year)
        draws = self.draws
        return compose_series(draws, x, y, elevation, index, through_day or draws.n_days, rng,
                              dataset=dataset, site_id=site_id)

    def impute(self, site: Union[int, str], seed: Optional[int] = None) -> PredictiveSamples:
        return impute_missing(self.draws, self.dataset, site, self.rng(seed))

    def yearly_averages(self, pred: PredictiveSamples, with_observed: bool = True) -> pd.DataFrame:
        """Yearly means with bands; observed days are merged in when the site is in the panel."""
        observed = None
        if with_observed and self._session.dataset is not None and pred.site.id in self.dataset.site_ids:
            observed = self.dataset.series(self.dataset.site_index(pred.site.id))
        return yearly_averages(pred, observed=observed)

    def surface(self, field: Union[FieldName, str], xs: Sequence[float], ys: Sequence[float],
                seed: Optional[int] = None) -> pd.DataFrame:
        return krige_surface(self.draws, field, np.asarray(xs, dtype=float), np.asarray(ys, dtype=float),
                             self.rng(seed))
