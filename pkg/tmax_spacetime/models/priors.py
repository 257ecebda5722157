# models/priors.py

from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class GaussianPrior(BaseModel):
    """N(mean, variance)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    mean: float = 0.0
    variance: float = 100.0 ** 2

    @field_validator("variance")
    @classmethod
    def _positive(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("prior variance must be > 0")
        return value

    @property
    def precision(self) -> float:
        return 1.0 / self.variance


class InverseGammaPrior(BaseModel):
    """IG(shape, rate): the precision 1/sigma^2 is Gamma(shape, rate)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    shape: float = 2.0
    rate: float = 1.0

    @field_validator("shape", "rate")
    @classmethod
    def _positive(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("inverse-gamma shape and rate must be > 0")
        return value

    @property
    def mean(self) -> float:
        """Prior mean of sigma^2 (the mode when the mean does not exist)."""
        if self.shape > 1:
            return self.rate / (self.shape - 1.0)
        return self.rate / (self.shape + 1.0)


def _coerce_gaussian(value):
    if isinstance(value, (list, tuple)):
        return {"mean": value[0], "variance": value[1]}
    return value


def _coerce_inverse_gamma(value):
    if isinstance(value, (list, tuple)):
        return {"shape": value[0], "rate": value[1]}
    return value


class HyperPriors(BaseModel):
    """Hyperpriors of every global parameter.

    Gaussian priors accept ``[mean, variance]`` pairs and inverse-gamma priors
    ``[shape, rate]`` pairs when built from a config file.
    """

    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    beta0: GaussianPrior = Field(default_factory=GaussianPrior)
    alpha: GaussianPrior = Field(default_factory=GaussianPrior)
    beta1: GaussianPrior = Field(default_factory=GaussianPrior)
    beta2: GaussianPrior = Field(default_factory=GaussianPrior)
    beta3: GaussianPrior = Field(default_factory=GaussianPrior)
    z_rho: GaussianPrior = Field(default_factory=GaussianPrior)
    z_sig2: GaussianPrior = Field(default_factory=lambda: GaussianPrior(mean=0.0, variance=1.0))

    sigma2_lambda: InverseGammaPrior = Field(default_factory=InverseGammaPrior)
    sigma2_eta: InverseGammaPrior = Field(default_factory=InverseGammaPrior)
    sigma2_beta0: InverseGammaPrior = Field(default_factory=InverseGammaPrior)
    sigma2_alpha: InverseGammaPrior = Field(default_factory=InverseGammaPrior)
    sigma2_rho: InverseGammaPrior = Field(default_factory=InverseGammaPrior)
    sigma2_sig2: InverseGammaPrior = Field(default_factory=InverseGammaPrior)

    rho_psi_bounds: Tuple[float, float] = (-1.0, 1.0)

    # "fixed" uses phi_fixed (3 / d_max when None); "grid:n" samples from n decays.
    phi_mode: str = "fixed"
    phi_fixed: Optional[float] = None
    phi_grid: Optional[List[float]] = None

    @field_validator("beta0", "alpha", "beta1", "beta2", "beta3", "z_rho", "z_sig2", mode="before")
    @classmethod
    def _gaussian_pairs(cls, value):
        return _coerce_gaussian(value)

    @field_validator(
        "sigma2_lambda", "sigma2_eta", "sigma2_beta0", "sigma2_alpha", "sigma2_rho", "sigma2_sig2",
        mode="before",
    )
    @classmethod
    def _inverse_gamma_pairs(cls, value):
        return _coerce_inverse_gamma(value)

    @model_validator(mode="after")
    def _check(self) -> "HyperPriors":
        low, high = self.rho_psi_bounds
        if not -1.0 <= low < high <= 1.0:
            raise ValueError("rho_psi truncation bounds must satisfy -1 <= a < b <= 1")
        self.phi_grid_size  # validates phi_mode
        if self.phi_fixed is not None and not self.phi_fixed > 0:
            raise ValueError("phi_fixed must be > 0")
        if self.phi_grid is not None:
            if not self.phi_grid or any(not v > 0 for v in self.phi_grid):
                raise ValueError("phi_grid must be non-empty and positive")
        return self

    @property
    def phi_grid_size(self) -> int:
        """1 in fixed mode, n for ``grid:n``."""
        mode = self.phi_mode.strip().lower()
        if mode == "fixed":
            return 1
        if mode.startswith("grid:"):
            try:
                size = int(mode.split(":", 1)[1])
            except ValueError:
                raise ValueError(f"cannot parse phi mode {self.phi_mode!r}")
            if size < 1:
                raise ValueError("phi grid needs at least one point")
            return size
        raise ValueError(f"phi mode must be 'fixed' or 'grid:n', got {self.phi_mode!r}")

    @property
    def phi_is_fixed(self) -> bool:
        return self.phi_mode.strip().lower() == "fixed"
