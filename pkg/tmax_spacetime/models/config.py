# models/config.py

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .design import ScalingPolicy
from .panel import DEFAULT_DAY_OF_YEAR_OFFSET
from .priors import HyperPriors
from .variant import ModelVariant
from ..exceptions import ConfigurationError
from ..utils import clean_params, derive_seed

DEFAULT_CHAINS = 10
DEFAULT_ITERATIONS = 200_000
DEFAULT_BURN_IN = 100_000
DEFAULT_THIN = 100
DEFAULT_SEED = 20240101
DEFAULT_MH_WINDOW = 100
DEFAULT_MH_FACTOR = 1.1


class RunConfig(BaseModel):
    """Settings of one fitting run; defaults follow the long production protocol."""

    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    chains: int = Field(DEFAULT_CHAINS, ge=1)
    iterations: int = Field(DEFAULT_ITERATIONS, ge=0)
    burn_in: int = Field(DEFAULT_BURN_IN, ge=0, alias="burn-in")
    thin: int = Field(DEFAULT_THIN, ge=1)
    seed: int = Field(DEFAULT_SEED, ge=0)
    variant: str = "M4"
    pin_rho_psi_zero: bool = True
    priors: HyperPriors = Field(default_factory=HyperPriors)
    day_of_year_offset: int = DEFAULT_DAY_OF_YEAR_OFFSET
    phi_mode: Optional[str] = None
    scaling: ScalingPolicy = ScalingPolicy.STANDARDIZE
    drop_rule: str = Field("site-year", description="'site-year' drops incomplete site-years, 'error' rejects them")
    mh_window: int = Field(DEFAULT_MH_WINDOW, ge=1)
    mh_factor: float = Field(DEFAULT_MH_FACTOR, gt=1.0)
    jobs: int = Field(1, ge=1)
    sites_path: Optional[str] = None
    observations_path: Optional[str] = None
    output_dir: Optional[str] = None

    @model_validator(mode="after")
    def _check(self) -> "RunConfig":
        if self.iterations > 0 and not self.burn_in < self.iterations:
            raise ConfigurationError(
                f"burn-in ({self.burn_in}) must be smaller than iterations ({self.iterations})"
            )
        if self.drop_rule not in ("site-year", "error"):
            raise ConfigurationError(f"drop_rule must be 'site-year' or 'error', got {self.drop_rule!r}")
        self.model_variant  # raises on a bad variant string
        if self.phi_mode is not None:
            try:
                self.priors = self.priors.model_copy(update={"phi_mode": self.phi_mode})
                self.priors.phi_grid_size
            except ValueError as e:
                raise ConfigurationError(str(e))
        return self

    @property
    def model_variant(self) -> ModelVariant:
        return ModelVariant.parse(self.variant, pin_rho_psi_zero=self.pin_rho_psi_zero)

    @property
    def n_draws(self) -> int:
        return max(self.iterations - self.burn_in, 0) // self.thin

    def with_overrides(self, **overrides) -> "RunConfig":
        data = self.model_dump(by_alias=False)
        data.update(clean_params(overrides))
        return RunConfig.model_validate(data)


class ChainSettings(BaseModel):
    """Iteration budget and seed of a single chain."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    iterations: int = Field(ge=0)
    burn_in: int = Field(0, ge=0)
    thin: int = Field(1, ge=1)
    seed: int = Field(0, ge=0)
    chain_index: int = 0
    mh_window: int = Field(DEFAULT_MH_WINDOW, ge=1)
    mh_factor: float = Field(DEFAULT_MH_FACTOR, gt=1.0)

    @model_validator(mode="after")
    def _check(self) -> "ChainSettings":
        if self.burn_in > self.iterations:
            raise ConfigurationError("burn-in cannot exceed the number of iterations")
        return self

    @property
    def n_draws(self) -> int:
        return (self.iterations - self.burn_in) // self.thin


def chain_settings(config: RunConfig, chain_index: int, base_seed: Optional[int] = None) -> ChainSettings:
    """Settings for chain ``chain_index``; its seed is the base seed XOR the index."""
    seed = config.seed if base_seed is None else base_seed
    return ChainSettings(
        iterations=config.iterations,
        burn_in=config.burn_in,
        thin=config.thin,
        seed=derive_seed(seed, chain_index),
        chain_index=chain_index,
        mh_window=config.mh_window,
        mh_factor=config.mh_factor,
    )
