# models/state.py

from typing import Dict, List

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from .variant import FieldName, FIELD_ORDER
from ..utils import z_to_rho, z_to_variance


class FixedEffects(BaseModel):
    """Intercept, year slope, harmonic and elevation coefficients on the fitting scale."""

    model_config = ConfigDict(extra="forbid", validate_assignment=False)

    beta0: float = 0.0
    alpha: float = 0.0
    beta1: float = 0.0
    beta2: float = 0.0
    beta3: float = 0.0

    @model_validator(mode="after")
    def _finite(self) -> "FixedEffects":
        if not np.all(np.isfinite([self.beta0, self.alpha, self.beta1, self.beta2, self.beta3])):
            raise ValueError("fixed effects must be finite")
        return self


class SiteLatents(BaseModel):
    """Per-site values of the four fields (hierarchically centred)."""

    model_config = ConfigDict(arbitrary_types_allowed=True, extra="forbid")

    beta0_tilde: np.ndarray
    alpha_tilde: np.ndarray
    z_rho: np.ndarray
    z_sig2: np.ndarray

    @model_validator(mode="before")
    @classmethod
    def _as_arrays(cls, data):
        if isinstance(data, dict):
            data = {k: np.array(v, dtype=float, copy=True) for k, v in data.items()}
        return data

    @property
    def rho(self) -> np.ndarray:
        return z_to_rho(self.z_rho)

    @property
    def sigma2_eps(self) -> np.ndarray:
        return z_to_variance(self.z_sig2)

    @property
    def n_sites(self) -> int:
        return len(self.beta0_tilde)


class TemporalEffects(BaseModel):
    """Yearly effects psi[t] (psi[0] = 0) and site-year effects gamma[t, i]."""

    model_config = ConfigDict(arbitrary_types_allowed=True, extra="forbid")

    psi: np.ndarray
    gamma: np.ndarray

    @model_validator(mode="before")
    @classmethod
    def _as_arrays(cls, data):
        if isinstance(data, dict):
            data = {k: np.array(v, dtype=float, copy=True) for k, v in data.items()}
        return data

    @model_validator(mode="after")
    def _first_year_pinned(self) -> "TemporalEffects":
        if self.psi.ndim != 1 or self.gamma.ndim != 2 or self.gamma.shape[0] != self.psi.shape[0]:
            raise ValueError("psi must be [T] and gamma [T x I]")
        if self.psi[0] != 0.0:
            raise ValueError("psi of the first year is fixed at zero")
        return self


class HyperState(BaseModel):
    """Process-level parameters: yearly AR coefficient, variances, global latent means and decays."""

    model_config = ConfigDict(extra="forbid")

    rho_psi: float = 0.0
    sigma2_lambda: float = 1.0
    sigma2_eta: float = 1.0
    sigma2_beta0: float = 1.0
    sigma2_alpha: float = 1.0
    sigma2_rho: float = 1.0
    sigma2_sig2: float = 1.0
    z_rho: float = 0.0
    z_sig2: float = 0.0
    phi_beta0: float = 1.0
    phi_alpha: float = 1.0
    phi_rho: float = 1.0
    phi_sig2: float = 1.0

    @model_validator(mode="after")
    def _check(self) -> "HyperState":
        if not -1.0 < self.rho_psi < 1.0:
            raise ValueError("rho_psi must lie strictly inside (-1, 1)")
        for name in VARIANCE_NAMES + DECAY_NAMES:
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and > 0, got {value}")
        if not (np.isfinite(self.z_rho) and np.isfinite(self.z_sig2)):
            raise ValueError("global latent means must be finite")
        return self


VARIANCE_NAMES = [
    "sigma2_lambda", "sigma2_eta", "sigma2_beta0", "sigma2_alpha", "sigma2_rho", "sigma2_sig2",
]
DECAY_NAMES = ["phi_beta0", "phi_alpha", "phi_rho", "phi_sig2"]

# field -> (site array, owner of the global mean, global mean attribute, variance, decay)
FIELD_SLOTS: Dict[FieldName, tuple] = {
    FieldName.BETA0: ("beta0_tilde", "fixed", "beta0", "sigma2_beta0", "phi_beta0"),
    FieldName.ALPHA: ("alpha_tilde", "fixed", "alpha", "sigma2_alpha", "phi_alpha"),
    FieldName.RHO: ("z_rho", "hyper", "z_rho", "sigma2_rho", "phi_rho"),
    FieldName.SIGMA: ("z_sig2", "hyper", "z_sig2", "sigma2_sig2", "phi_sig2"),
}


class ModelState(BaseModel):
    """One point in parameter space. Single-owner and mutated in place by a chain."""

    model_config = ConfigDict(arbitrary_types_allowed=True, extra="forbid")

    fixed: FixedEffects
    latents: SiteLatents
    temporal: TemporalEffects
    hyper: HyperState

    @property
    def n_sites(self) -> int:
        return self.latents.n_sites

    @property
    def n_years(self) -> int:
        return len(self.temporal.psi)

    def field_values(self, field: FieldName) -> np.ndarray:
        return getattr(self.latents, FIELD_SLOTS[FieldName(field)][0])

    def set_field_values(self, field: FieldName, values: np.ndarray) -> None:
        setattr(self.latents, FIELD_SLOTS[FieldName(field)][0], np.asarray(values, dtype=float))

    def field_mean(self, field: FieldName) -> float:
        _, owner, attr, _, _ = FIELD_SLOTS[FieldName(field)]
        return float(getattr(getattr(self, owner), attr))

    def set_field_mean(self, field: FieldName, value: float) -> None:
        _, owner, attr, _, _ = FIELD_SLOTS[FieldName(field)]
        setattr(getattr(self, owner), attr, float(value))

    def field_variance(self, field: FieldName) -> float:
        return float(getattr(self.hyper, FIELD_SLOTS[FieldName(field)][3]))

    def field_decay(self, field: FieldName) -> float:
        return float(getattr(self.hyper, FIELD_SLOTS[FieldName(field)][4]))

    def collapse_field(self, field: FieldName) -> None:
        """Hold a disabled field at its global value at every site."""
        self.set_field_values(field, np.full(self.n_sites, self.field_mean(field)))

    def copy(self) -> "ModelState":
        return self.model_copy(deep=True)

    def non_finite(self) -> List[str]:
        """Names of components holding a non-finite value."""
        bad = []
        for name in ("beta0", "alpha", "beta1", "beta2", "beta3"):
            if not np.isfinite(getattr(self.fixed, name)):
                bad.append(name)
        for field in FIELD_ORDER:
            if not np.all(np.isfinite(self.field_values(field))):
                bad.append(FIELD_SLOTS[field][0])
        for name in ["rho_psi", "z_rho", "z_sig2"] + VARIANCE_NAMES + DECAY_NAMES:
            value = getattr(self.hyper, name)
            if not np.isfinite(value) or (name in VARIANCE_NAMES and value <= 0):
                bad.append(name)
        if not np.all(np.isfinite(self.temporal.psi)):
            bad.append("psi")
        if not np.all(np.isfinite(self.temporal.gamma)):
            bad.append("gamma")
        return bad

    def check_invariants(self) -> None:
        """Raise ValueError when a stored-state invariant is broken."""
        bad = self.non_finite()
        if bad:
            raise ValueError(f"non-finite components: {bad}")
        if self.temporal.psi[0] != 0.0:
            raise ValueError("psi of the first year must be zero")
        if not -1.0 < self.hyper.rho_psi < 1.0:
            raise ValueError("rho_psi outside (-1, 1)")
        if np.any(np.abs(self.latents.rho) >= 1.0):
            raise ValueError("site autocorrelation outside (-1, 1)")
