# models/panel.py

from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .site import SiteMeta, check_unique_ids
from ..exceptions import DataValidationError, EmptyPanelError

TEMPERATURE_MIN_C = -60.0
TEMPERATURE_MAX_C = 60.0
DEFAULT_DAY_OF_YEAR_OFFSET = 120  # day 1 of the season is May 1, calendar day 121


class PanelDataset(BaseModel):
    """Daily maximum temperatures Y[t, l, i] for T years, L days and I sites.

    Missing cells hold NaN in ``values`` and True in ``missing``. Instances are
    immutable: the arrays are flagged read-only on construction.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True, extra="forbid")

    sites: List[SiteMeta]
    values: np.ndarray
    missing: Optional[np.ndarray] = None
    day_of_year_offset: int = DEFAULT_DAY_OF_YEAR_OFFSET
    first_year: Optional[int] = Field(None, description="Calendar year of t = 1, when known")

    @model_validator(mode="before")
    @classmethod
    def _coerce_arrays(cls, data):
        if isinstance(data, dict):
            data = dict(data)
            values = np.array(data.get("values"), dtype=float, copy=True)
            if values.ndim != 3:
                raise DataValidationError(f"values must be a [T x L x I] array, got shape {values.shape}")
            missing = data.get("missing")
            missing = np.isnan(values) if missing is None else np.array(missing, dtype=bool, copy=True)
            if missing.shape != values.shape:
                raise DataValidationError("missing mask shape does not match values")
            values[missing] = np.nan
            values.flags.writeable = False
            missing.flags.writeable = False
            data["values"] = values
            data["missing"] = missing
        return data

    @model_validator(mode="after")
    def _check_invariants(self) -> "PanelDataset":
        n_years, n_days, n_sites = self.values.shape
        if n_years == 0 or n_days == 0 or n_sites == 0:
            raise EmptyPanelError(f"empty panel: T={n_years}, L={n_days}, I={n_sites}")
        if len(self.sites) != n_sites:
            raise DataValidationError(f"{len(self.sites)} sites but values hold {n_sites} columns")
        try:
            check_unique_ids(self.sites)
        except ValueError as e:
            raise DataValidationError(str(e))
        if np.isnan(self.values[~self.missing]).any():
            raise DataValidationError("non-missing cells must be finite")
        observed = self.values[~self.missing]
        if observed.size and (observed.min() < TEMPERATURE_MIN_C or observed.max() > TEMPERATURE_MAX_C):
            raise DataValidationError(
                f"temperatures must lie in [{TEMPERATURE_MIN_C}, {TEMPERATURE_MAX_C}] C, "
                f"got [{observed.min()}, {observed.max()}]"
            )
        return self

    @property
    def n_years(self) -> int:
        return self.values.shape[0]

    @property
    def n_days(self) -> int:
        return self.values.shape[1]

    @property
    def n_sites(self) -> int:
        return self.values.shape[2]

    @property
    def site_ids(self) -> List[str]:
        return [site.id for site in self.sites]

    def site_index(self, site_id: str) -> int:
        for index, site in enumerate(self.sites):
            if site.id == site_id:
                return index
        raise KeyError(f"unknown site id {site_id!r}")

    def series(self, site: int) -> np.ndarray:
        """The [T x L] series of one site (NaN where missing)."""
        return self.values[:, :, site]

    def complete_mask(self) -> np.ndarray:
        """[T x I] mask of site-years with no missing day."""
        return ~self.missing.any(axis=1)

    def completeness(self) -> Dict[str, float]:
        """Fraction of observed cells per site."""
        observed = 1.0 - self.missing.mean(axis=(0, 1))
        return {site.id: float(frac) for site, frac in zip(self.sites, observed)}

    def year_label(self, year: int) -> int:
        """Calendar year for 1-based year index ``year`` (the index itself if unknown)."""
        return year if self.first_year is None else self.first_year + year - 1

    def year_index(self, label: int) -> int:
        """1-based year index for a calendar year (identity if ``first_year`` unknown)."""
        index = label if self.first_year is None else label - self.first_year + 1
        if not 1 <= index <= self.n_years:
            raise DataValidationError(f"year {label} outside the panel")
        return index

    def select_sites(self, indices: List[int]) -> "PanelDataset":
        indices = list(indices)
        return PanelDataset(
            sites=[self.sites[i] for i in indices],
            values=self.values[:, :, indices],
            missing=self.missing[:, :, indices],
            day_of_year_offset=self.day_of_year_offset,
            first_year=self.first_year,
        )

    def drop_site(self, site: int) -> "PanelDataset":
        """Panel with one site withheld (leave-one-out training set)."""
        return self.select_sites([i for i in range(self.n_sites) if i != site])
