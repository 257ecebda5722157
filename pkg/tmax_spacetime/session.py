import logging
from pathlib import Path
from typing import List, Optional, Union

from .dataio.config_file import load_config
from .dataio.ingest import ingest
from .models.chain import ChainOutput
from .models.config import RunConfig
from .models.panel import PanelDataset
from .resources import Evaluation, Fitting, LocalModels, Prediction
from . import utils

logger = logging.getLogger(__name__)

DEFAULT_COORDINATES = "planar"


class SpaceTimeSession:
    """One dataset, one run configuration and the chains fitted to them.

    Work is done through the resources attached on construction:
    ``fitting``, ``prediction``, ``evaluation`` and ``local_models``.
    """

    def __init__(
        self,
        *,
        dataset: Optional[PanelDataset] = None,
        config: Optional[RunConfig] = None,
        chains: Optional[List[ChainOutput]] = None,
    ):
        self.dataset = dataset
        self.config = config or RunConfig()
        self.chains: List[ChainOutput] = list(chains or [])
        self.utils = utils

        self._initialize_resources()

    @classmethod
    def from_files(
        cls,
        *,
        sites_path: Union[str, Path],
        observations_path: Union[str, Path],
        config_path: Optional[Union[str, Path]] = None,
        coordinates: str = DEFAULT_COORDINATES,
        n_days: Optional[int] = None,
        **overrides,
    ) -> "SpaceTimeSession":
        """Session over an ingested panel; ``overrides`` take precedence over the config file."""
        config = load_config(config_path, sites_path=str(sites_path),
                             observations_path=str(observations_path), **overrides)
        dataset = ingest(sites_path, observations_path, coordinates=coordinates, n_days=n_days,
                         day_of_year_offset=config.day_of_year_offset)
        return cls(dataset=dataset, config=config)

    def _initialize_resources(self):
        """Initialize resource classes."""
        self.fitting = Fitting(session=self)
        self.prediction = Prediction(session=self)
        self.evaluation = Evaluation(session=self)
        self.local_models = LocalModels(session=self)

    def __repr__(self) -> str:
        if self.dataset is None:
            return "SpaceTimeSession(no data)"
        T, L, I = self.dataset.values.shape
        return f"SpaceTimeSession(T={T}, L={L}, I={I}, variant={self.config.variant}, chains={len(self.chains)})"
