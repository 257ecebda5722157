# models/chain.py

from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .design import CovariateScaling
from .site import SiteMeta
from .state import (
    DECAY_NAMES,
    VARIANCE_NAMES,
    FixedEffects,
    HyperState,
    ModelState,
    SiteLatents,
    TemporalEffects,
)
from .variant import ModelVariant
from ..exceptions import SiteMismatchError

FIXED_NAMES = ["beta0", "alpha", "beta1", "beta2", "beta3"]
SCALAR_NAMES = FIXED_NAMES + ["rho_psi"] + VARIANCE_NAMES + ["z_rho", "z_sig2"] + DECAY_NAMES
SITE_FIELD_NAMES = ["beta0_tilde", "alpha_tilde", "z_rho", "z_sig2"]


def site_field_key(name: str) -> str:
    """Held-list key standing for a site field at every site."""
    return f"{name}[*]"


class AcceptanceReport(BaseModel):
    """Post-burn-in Metropolis acceptance rates per site latent family."""

    model_config = ConfigDict(extra="forbid")

    proposals: int = 0
    rates: Dict[str, List[float]] = Field(default_factory=dict)
    proposal_sd: Dict[str, List[float]] = Field(default_factory=dict)

    def mean_rate(self, family: str) -> float:
        values = [v for v in self.rates.get(family) or [] if np.isfinite(v)]
        if not values or self.proposals == 0:
            return float("nan")
        return float(np.mean(values))


class ChainOutput(BaseModel):
    """Thinned posterior draws of one chain.

    ``scalars`` maps each scalar parameter to a [n] array, ``site_fields`` maps
    each field to [n x I], ``psi`` is [n x T] and ``gamma`` is [n x T x I].
    Parameters listed in ``held`` were not sampled (pinned or collapsed).
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, extra="forbid")

    chain_index: int = 0
    seed: int
    iterations: int
    burn_in: int
    thin: int
    variant: ModelVariant
    sites: List[SiteMeta]
    scaling: CovariateScaling
    n_years: int
    n_days: int
    day_of_year_offset: int
    first_year: Optional[int] = None
    draw_iterations: np.ndarray
    scalars: Dict[str, np.ndarray]
    site_fields: Dict[str, np.ndarray]
    psi: np.ndarray
    gamma: np.ndarray
    acceptance: AcceptanceReport = Field(default_factory=AcceptanceReport)
    held: List[str] = Field(default_factory=list)
    rescaled: bool = False
    intercept_mode: Optional[str] = None

    @property
    def n_draws(self) -> int:
        return len(self.draw_iterations)

    @property
    def site_ids(self) -> List[str]:
        return [site.id for site in self.sites]

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    def state_at(self, k: int) -> ModelState:
        """Rebuild the ModelState of retained draw ``k``."""
        scalars = {name: float(values[k]) for name, values in self.scalars.items()}
        return ModelState(
            fixed=FixedEffects(**{name: scalars[name] for name in FIXED_NAMES}),
            latents=SiteLatents(**{name: self.site_fields[name][k] for name in SITE_FIELD_NAMES}),
            temporal=TemporalEffects(psi=self.psi[k], gamma=self.gamma[k]),
            hyper=HyperState.model_construct(
                **{name: scalars[name] for name in ["rho_psi"] + VARIANCE_NAMES + ["z_rho", "z_sig2"] + DECAY_NAMES}
            ),
        )

    def select(self, indices: np.ndarray) -> "ChainOutput":
        """A view restricted to the retained draws ``indices``."""
        indices = np.asarray(indices, dtype=int)
        return self.model_copy(update={
            "draw_iterations": self.draw_iterations[indices],
            "scalars": {k: v[indices] for k, v in self.scalars.items()},
            "site_fields": {k: v[indices] for k, v in self.site_fields.items()},
            "psi": self.psi[indices],
            "gamma": self.gamma[indices],
        })

    def select_sites(self, site_ids: List[str]) -> "ChainOutput":
        """A view restricted to the named sites, in the given order."""
        missing = [s for s in site_ids if s not in self.site_ids]
        if missing:
            raise SiteMismatchError(f"site(s) {missing} are not part of the fit")
        columns = [self.site_ids.index(s) for s in site_ids]
        return self.model_copy(update={
            "sites": [self.sites[i] for i in columns],
            "site_fields": {k: v[:, columns] for k, v in self.site_fields.items()},
            "gamma": self.gamma[:, :, columns],
        })

    def sampled_parameters(self) -> Dict[str, np.ndarray]:
        """Flat name -> [n] mapping of every sampled scalar and site-level value."""
        flat: Dict[str, np.ndarray] = {}
        for name in SCALAR_NAMES:
            if name not in self.held:
                flat[name] = self.scalars[name]
        for name in SITE_FIELD_NAMES:
            if site_field_key(name) in self.held:
                continue
            values = self.site_fields[name]
            for i, site_id in enumerate(self.site_ids):
                flat[f"{name}[{site_id}]"] = values[:, i]
        if "psi" not in self.held:
            for t in range(1, self.n_years):
                flat[f"psi[{t + 1}]"] = self.psi[:, t]
        return flat


def pool_chains(chains: List[ChainOutput]) -> ChainOutput:
    """Concatenate the draws of several chains (chain order preserved)."""
    if not chains:
        raise ValueError("no chains to pool")
    first = chains[0]
    if len(chains) == 1:
        return first
    for other in chains[1:]:
        if other.site_ids != first.site_ids or other.rescaled != first.rescaled:
            raise ValueError("chains to pool must share sites and scale")
    return first.model_copy(update={
        "draw_iterations": np.concatenate([c.draw_iterations for c in chains]),
        "scalars": {k: np.concatenate([c.scalars[k] for c in chains]) for k in first.scalars},
        "site_fields": {k: np.concatenate([c.site_fields[k] for c in chains]) for k in first.site_fields},
        "psi": np.concatenate([c.psi for c in chains]),
        "gamma": np.concatenate([c.gamma for c in chains]),
    })
