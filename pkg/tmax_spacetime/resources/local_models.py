# resources/local_models.py

from typing import Dict, List, Optional, Sequence, Union

import pandas as pd

from .base import SessionResource
from ..local_model import compare_local_vs_full, fit_local, fit_local_all
from ..models.chain import ChainOutput


class LocalModels(SessionResource):
    """Independent single-site fits and their agreement with the spatial fit."""

    def fit(self, site: Union[int, str], jobs: Optional[int] = None) -> List[ChainOutput]:
        return fit_local(self.dataset, site, self.config, jobs=jobs)

    def fit_all(self, sites: Optional[Sequence[str]] = None, jobs: Optional[int] = None) -> Dict[str, ChainOutput]:
        return fit_local_all(self.dataset, self.config, sites=sites, jobs=jobs)

    def compare(self, local_fits: Dict[str, ChainOutput], level: float = 0.90) -> pd.DataFrame:
        """Interval overlap against the session's fit, restricted to the locally fitted sites."""
        full = self.draws
        if len(local_fits) < full.n_sites:
            full = full.select_sites([s for s in full.site_ids if s in local_fits])
        return compare_local_vs_full(local_fits, full, level=level)
