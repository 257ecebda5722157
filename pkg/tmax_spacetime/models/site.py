# models/site.py

from typing import List

import math

from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..utils import validate_identifier

ELEVATION_MIN_M = -500.0
ELEVATION_MAX_M = 9000.0


class SiteMeta(BaseModel):
    """A monitoring station: projected planar coordinates (km) and elevation (m)."""

    model_config = ConfigDict(populate_by_name=True, frozen=True, extra="forbid")

    id: str
    x: float = Field(alias="x_km")
    y: float = Field(alias="y_km")
    elevation: float = Field(alias="elev_m")

    @field_validator("id")
    @classmethod
    def _check_id(cls, value: str) -> str:
        return validate_identifier(value, "site id")

    @field_validator("x", "y")
    @classmethod
    def _check_coordinate(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("coordinates must be finite")
        return value

    @field_validator("elevation")
    @classmethod
    def _check_elevation(cls, value: float) -> float:
        if not math.isfinite(value) or not ELEVATION_MIN_M <= value <= ELEVATION_MAX_M:
            raise ValueError(f"elevation {value} outside [{ELEVATION_MIN_M}, {ELEVATION_MAX_M}] m")
        return value


def check_unique_ids(sites: List[SiteMeta]) -> List[SiteMeta]:
    seen = set()
    for site in sites:
        if site.id in seen:
            raise ValueError(f"duplicate site id {site.id!r}")
        seen.add(site.id)
    return sites
