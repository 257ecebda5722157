# resources/evaluation.py

from typing import Optional, Sequence, Tuple, Union

import pandas as pd

from .base import SessionResource
from ..evaluation.change import change_summary, change_table
from ..evaluation.loocv import loocv_frame, run_loocv
from ..models.reports import ChangeSummary, LoocvResult
from ..models.variant import STANDARD_LATTICE, ModelVariant

Window = Tuple[int, int]


class Evaluation(SessionResource):
    """Cross-validated variant comparison and window change summaries."""

    def loocv(self, variants: Optional[Sequence[Union[str, ModelVariant]]] = None,
              jobs: Optional[int] = None) -> LoocvResult:
        """Leave-one-site-out scores of ``variants`` (the nine-variant lattice by default)."""
        return run_loocv(self.dataset, self.config, variants or STANDARD_LATTICE, jobs=jobs)

    def loocv_table(self, result: LoocvResult) -> pd.DataFrame:
        return loocv_frame(result)

    def change_table(self, window1: Window, window2: Window) -> pd.DataFrame:
        return change_table(self.dataset, window1, window2)

    def change_summary(self, site: str, window1: Window, window2: Window) -> ChangeSummary:
        """Window change of one observed site; windows in calendar years when known."""
        dataset = self.dataset
        years = [dataset.year_label(t) for t in range(1, dataset.n_years + 1)]
        return change_summary(dataset.series(dataset.site_index(site)), window1, window2, site=site, years=years)
