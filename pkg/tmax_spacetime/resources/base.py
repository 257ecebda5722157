# resources/base.py

from typing import TYPE_CHECKING, List, Optional

import numpy as np

from ..exceptions import ConfigurationError
from ..models.chain import ChainOutput, pool_chains
from ..models.config import RunConfig
from ..models.panel import PanelDataset
from ..utils import derive_seed

if TYPE_CHECKING:
    from ..session import SpaceTimeSession


class SessionResource:
    """
    Base class for the session's resources.

    A resource holds no state of its own: the dataset, configuration and
    fitted chains live on the session so every resource sees the same run.
    """

    # offset XOR-ed into the run seed so each resource draws its own stream
    stream: int = 0

    def __init__(self, *, session: "SpaceTimeSession") -> None:
        self._session = session

    def __repr__(self) -> str:
        return f"<{self.__class__.__name__} of {self._session!r}>"

    @property
    def dataset(self) -> PanelDataset:
        if self._session.dataset is None:
            raise ConfigurationError("the session has no dataset; load one first")
        return self._session.dataset

    @property
    def config(self) -> RunConfig:
        return self._session.config

    @property
    def chains(self) -> List[ChainOutput]:
        if not self._session.chains:
            raise ConfigurationError("no fitted chains; run session.fitting.fit() or load a fit")
        return self._session.chains

    @property
    def draws(self) -> ChainOutput:
        """All chains pooled, on the fitting scale."""
        return pool_chains(self.chains)

    def rng(self, seed: Optional[int] = None) -> np.random.Generator:
        base = self.config.seed if seed is None else seed
        return np.random.default_rng(derive_seed(base, self.stream))
