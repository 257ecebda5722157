# resources/fitting.py

import logging
from pathlib import Path
from typing import Dict, List, Optional, Union

from .base import SessionResource
from ..dataio.writers import read_fit, write_diagnostics, write_fit, write_summary
from ..diagnostics import diagnose
from ..models.chain import ChainOutput
from ..models.reports import DiagnosticsReport, ParameterSummary
from ..sampler.chain import run_chains
from ..summary import posterior_summary

logger = logging.getLogger(__name__)


class Fitting(SessionResource):
    """Fit the space-time model and inspect the posterior."""

    def fit(self, variant: Optional[str] = None, jobs: Optional[int] = None, **overrides) -> List[ChainOutput]:
        """Run every chain of the session's configuration and keep the draws on the session."""
        config = self.config.with_overrides(variant=variant, **overrides)
        chains = run_chains(self.dataset, config, jobs=jobs)
        self._session.config = config
        self._session.chains = chains
        logger.info(f"Fitted {config.model_variant.code} with {len(chains)} chain(s), {chains[0].n_draws} draws each")
        return chains

    def summary(self, intercept: str = "centered") -> Dict[str, ParameterSummary]:
        return posterior_summary(self.draws, intercept=intercept)

    def diagnose(self, rhat_draws: Optional[int] = None, inference_draws: Optional[int] = None) -> DiagnosticsReport:
        return diagnose(self.chains, rhat_target=rhat_draws, inference_target=inference_draws)

    def save(self, directory: Union[str, Path]) -> Dict[str, Path]:
        """Write draws, run metadata and the posterior summary under ``directory``."""
        paths = write_fit(self.chains, directory)
        paths["summary"] = write_summary(self.summary(), Path(directory) / "summary.json")
        return paths

    def save_diagnostics(self, path: Union[str, Path], **kwargs) -> Path:
        return write_diagnostics(self.diagnose(**kwargs), path)

    def load(self, directory: Union[str, Path]) -> List[ChainOutput]:
        """Restore chains written by ``save``."""
        chains = read_fit(directory)
        self._session.chains = chains
        return chains
