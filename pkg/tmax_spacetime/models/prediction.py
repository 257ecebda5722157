# models/prediction.py

from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, model_validator

from .site import SiteMeta
from ..utils import interval

DEFAULT_INTERVAL_LEVEL = 0.90


class PredictiveSamples(BaseModel):
    """B posterior-predictive replicates of a daily series at one site.

    ``replicates`` is [B x n_years x n_days]; ``years`` and ``days`` hold the
    1-based indices of the columns and ``cells`` marks which cells were
    predicted (the rest are NaN).
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, extra="forbid")

    site: SiteMeta
    replicates: np.ndarray
    years: List[int]
    days: List[int]
    cells: Optional[np.ndarray] = None

    @model_validator(mode="after")
    def _check(self) -> "PredictiveSamples":
        if self.replicates.ndim != 3:
            raise ValueError("replicates must be [B x n_years x n_days]")
        if self.replicates.shape[0] < 1:
            raise ValueError("at least one replicate is required")
        if self.replicates.shape[1:] != (len(self.years), len(self.days)):
            raise ValueError("replicate shape does not match years/days")
        if self.cells is None:
            self.cells = np.ones(self.replicates.shape[1:], dtype=bool)
        elif self.cells.shape != self.replicates.shape[1:]:
            raise ValueError("cell mask shape does not match years/days")
        return self

    @property
    def n_replicates(self) -> int:
        return self.replicates.shape[0]

    def mean(self) -> np.ndarray:
        """Per-cell predictive mean (NaN outside the predicted cells)."""
        out = np.full(self.cells.shape, np.nan)
        out[self.cells] = self.replicates[:, self.cells].mean(axis=0)
        return out

    def interval(self, level: float = DEFAULT_INTERVAL_LEVEL) -> Tuple[np.ndarray, np.ndarray]:
        lower = np.full(self.cells.shape, np.nan)
        upper = np.full(self.cells.shape, np.nan)
        if self.cells.any():
            lo, hi = interval(self.replicates[:, self.cells], level=level, axis=0)
            lower[self.cells] = lo
            upper[self.cells] = hi
        return lower, upper

    def to_frame(self, level: float = DEFAULT_INTERVAL_LEVEL) -> pd.DataFrame:
        """Long table ``year,day,mean,lower,upper`` over the predicted cells."""
        mean = self.mean()
        lower, upper = self.interval(level)
        rows = []
        for a, year in enumerate(self.years):
            for b, day in enumerate(self.days):
                if self.cells[a, b]:
                    rows.append((year, day, mean[a, b], lower[a, b], upper[a, b]))
        return pd.DataFrame(rows, columns=["year", "day", "mean", "lower", "upper"])
