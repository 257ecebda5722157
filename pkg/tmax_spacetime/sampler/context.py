# sampler/context.py

import logging
from typing import Dict, Optional

import numpy as np

from .workspace import ResidualWorkspace
from ..models.design import ModelDesign
from ..models.panel import PanelDataset
from ..models.priors import GaussianPrior, HyperPriors, InverseGammaPrior
from ..models.state import ModelState
from ..models.variant import FIELD_ORDER, FieldName, ModelVariant
from ..spatial.kernels import CorrelationCache, CorrelationMatrix, phi_support

logger = logging.getLogger(__name__)

GLOBAL_PRIOR_NAMES = {
    FieldName.BETA0: "beta0",
    FieldName.ALPHA: "alpha",
    FieldName.RHO: "z_rho",
    FieldName.SIGMA: "z_sig2",
}
VARIANCE_PRIOR_NAMES = {
    FieldName.BETA0: "sigma2_beta0",
    FieldName.ALPHA: "sigma2_alpha",
    FieldName.RHO: "sigma2_rho",
    FieldName.SIGMA: "sigma2_sig2",
}


class GibbsContext:
    """Everything a sweep reads but never writes: design, priors, variant and the
    per-decay correlation factorizations. The residual workspace is owned by the
    chain and refreshed at the start of every sweep.
    """

    def __init__(
        self,
        dataset: PanelDataset,
        design: ModelDesign,
        priors: HyperPriors,
        variant: ModelVariant,
        drop_rule: str = "site-year",
        workspace: Optional[ResidualWorkspace] = None,
        cache: Optional[CorrelationCache] = None,
    ):
        self.dataset = dataset
        self.design = design
        self.priors = priors
        self.variant = variant
        self.workspace = workspace or ResidualWorkspace(dataset, design, drop_rule=drop_rule)
        self.n_years, self.n_days, self.n_sites = dataset.values.shape
        self.beta3_pinned = not design.elevation_identified
        if self.beta3_pinned:
            logger.info("Elevation has no spread across sites; beta3 is held at 0")
        self.cache = cache or CorrelationCache(dataset.sites)
        support = phi_support(dataset.sites, priors.phi_grid_size, priors.phi_fixed, priors.phi_grid)
        self.phi_grid: Dict[FieldName, np.ndarray] = {field: support for field in FIELD_ORDER}
        for field in variant.enabled_fields:
            self.cache.precompute(self.phi_grid[field])

    @property
    def phi_sampled(self) -> bool:
        return not self.priors.phi_is_fixed and len(next(iter(self.phi_grid.values()))) > 1

    def correlation(self, state: ModelState, field: FieldName) -> CorrelationMatrix:
        return self.cache.get(state.field_decay(field))

    def global_prior(self, field: FieldName) -> GaussianPrior:
        return getattr(self.priors, GLOBAL_PRIOR_NAMES[FieldName(field)])

    def variance_prior(self, field: FieldName) -> InverseGammaPrior:
        return getattr(self.priors, VARIANCE_PRIOR_NAMES[FieldName(field)])

    def with_values(self, values: np.ndarray) -> "GibbsContext":
        """Same model over replacement data (used by simulation-based checks)."""
        workspace = ResidualWorkspace(self.dataset, self.design, values=values)
        return GibbsContext(
            self.dataset, self.design, self.priors, self.variant,
            workspace=workspace, cache=self.cache,
        )
