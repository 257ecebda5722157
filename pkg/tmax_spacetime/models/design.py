# models/design.py

from enum import Enum
from typing import Dict

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


class ScalingPolicy(str, Enum):
    """How covariates are transformed before fitting."""
    STANDARDIZE = "standardize"
    CENTER = "center"
    NONE = "none"


COVARIATES = ("t", "sin", "cos", "elev")


class AffineScale(BaseModel):
    """x_scaled = (x - center) / scale."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    center: float = 0.0
    scale: float = 1.0

    @field_validator("scale")
    @classmethod
    def _positive(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("scale must be > 0")
        return value

    def apply(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.center) / self.scale

    @property
    def is_identity(self) -> bool:
        return self.center == 0.0 and self.scale == 1.0


class CovariateScaling(BaseModel):
    """Centering and scaling record for the year index, the harmonics and elevation."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    t: AffineScale = Field(default_factory=AffineScale)
    sin: AffineScale = Field(default_factory=AffineScale)
    cos: AffineScale = Field(default_factory=AffineScale)
    elev: AffineScale = Field(default_factory=AffineScale)
    policy: ScalingPolicy = ScalingPolicy.STANDARDIZE

    @property
    def is_identity(self) -> bool:
        return all(getattr(self, name).is_identity for name in COVARIATES)

    def as_dict(self) -> Dict[str, Dict[str, float]]:
        return {name: getattr(self, name).model_dump() for name in COVARIATES}


class HarmonicBasis(BaseModel):
    """Raw annual harmonics sin(2 pi (l + offset) / 365), cos(...) for l = 1..L."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    sin: np.ndarray
    cos: np.ndarray
    day_of_year_offset: int

    @property
    def n_days(self) -> int:
        return len(self.sin)


class ModelDesign(BaseModel):
    """Covariates on the fitting scale, shared read-only by every chain."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    basis: HarmonicBasis
    scaling: CovariateScaling
    t: np.ndarray  # [T], scaled year index
    sin: np.ndarray  # [L]
    cos: np.ndarray  # [L]
    elev: np.ndarray  # [I]

    @property
    def elevation_identified(self) -> bool:
        """False when elevation has no spread, so beta3 is confounded with the intercept."""
        return bool(np.ptp(self.elev) > 0) if self.elev.size else False

    def scale_year(self, year: float) -> float:
        return float(self.scaling.t.apply(year))

    def scale_elevation(self, elevation: float) -> float:
        return float(self.scaling.elev.apply(elevation))
