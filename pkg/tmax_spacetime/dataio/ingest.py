"""Read station metadata and daily observations into a PanelDataset."""

import logging
from datetime import date
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from ..exceptions import EmptyPanelError, IngestError
from ..models.panel import DEFAULT_DAY_OF_YEAR_OFFSET, PanelDataset
from ..models.site import SiteMeta, check_unique_ids

logger = logging.getLogger(__name__)

EARTH_RADIUS_KM = 6371.0088
SEASON_START = (5, 1)
SEASON_END = (9, 30)
SEASON_DAYS = 153

PLANAR_SITE_COLUMNS = ["id", "x_km", "y_km", "elev_m"]
LONLAT_SITE_COLUMNS = ["id", "lon", "lat", "elev_m"]
OBSERVATION_COLUMNS = ["site_id", "date", "tmax_c"]

PathLike = Union[str, Path]


def _read_table(path: PathLike) -> pd.DataFrame:
    try:
        return pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise EmptyPanelError(f"{path} is empty")


def _require_columns(frame: pd.DataFrame, columns: List[str], path: PathLike) -> None:
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise IngestError(f"{path}: missing column(s) {missing}; expected {columns}", line=1)


def _parse_float(value: str, column: str, line: int) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise IngestError(f"cannot parse {column} value {value!r}", line=line)


def project_lonlat(lon: np.ndarray, lat: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Equirectangular projection (km) about the centroid of the given points."""
    lon = np.radians(np.asarray(lon, dtype=float))
    lat = np.radians(np.asarray(lat, dtype=float))
    lon0, lat0 = lon.mean(), lat.mean()
    x = EARTH_RADIUS_KM * (lon - lon0) * np.cos(lat0)
    y = EARTH_RADIUS_KM * (lat - lat0)
    return x, y


def read_sites(path: PathLike, coordinates: str = "planar") -> List[SiteMeta]:
    """Sites from ``id,x_km,y_km,elev_m`` or, with ``coordinates="lonlat"``, ``id,lon,lat,elev_m``."""
    if coordinates not in ("planar", "lonlat"):
        raise ValueError(f"coordinates must be 'planar' or 'lonlat', got {coordinates!r}")
    frame = _read_table(path)
    columns = PLANAR_SITE_COLUMNS if coordinates == "planar" else LONLAT_SITE_COLUMNS
    _require_columns(frame, columns, path)

    ids, first, second, elevations = [], [], [], []
    for index, row in frame.iterrows():
        line = index + 2
        ids.append(row["id"])
        first.append(_parse_float(row[columns[1]], columns[1], line))
        second.append(_parse_float(row[columns[2]], columns[2], line))
        elevations.append(_parse_float(row["elev_m"], "elev_m", line))
    if coordinates == "lonlat" and ids:
        first, second = project_lonlat(first, second)

    sites = []
    for k, site_id in enumerate(ids):
        try:
            sites.append(SiteMeta(id=site_id, x=float(first[k]), y=float(second[k]), elevation=elevations[k]))
        except ValueError as e:
            raise IngestError(f"invalid site {site_id!r}: {e}", line=k + 2)
    try:
        check_unique_ids(sites)
    except ValueError as e:
        raise IngestError(str(e))
    logger.info(f"Read {len(sites)} site(s) from {path}")
    return sites


def season_day(day: date) -> Optional[int]:
    """1-based day of the May-September season, or None outside it."""
    start = date(day.year, *SEASON_START)
    end = date(day.year, *SEASON_END)
    if not start <= day <= end:
        return None
    return (day - start).days + 1


def _parse_date(value: str, line: int) -> date:
    try:
        return date.fromisoformat(str(value).strip())
    except ValueError:
        raise IngestError(f"cannot parse date {value!r}; expected YYYY-MM-DD", line=line)


def read_observations(path: PathLike, sites: List[SiteMeta], n_days: Optional[int] = None,
                      day_of_year_offset: int = DEFAULT_DAY_OF_YEAR_OFFSET) -> PanelDataset:
    """Build the [T x L x I] panel from ``site_id,date,tmax_c`` rows.

    Rows outside May-September are skipped and counted. Years run from the
    first to the last observed year; ``n_days`` defaults to the last observed
    season day. ``day_of_year_offset`` is the calendar day preceding season
    day 1 in the harmonic terms (0 reads the season days as day-of-year).
    """
    frame = _read_table(path)
    _require_columns(frame, OBSERVATION_COLUMNS, path)
    column = {site.id: i for i, site in enumerate(sites)}

    cells: Dict[Tuple[int, int, int], Tuple[float, int]] = {}
    skipped = 0
    for index, row in frame.iterrows():
        line = index + 2
        site_id = str(row["site_id"]).strip()
        if site_id not in column:
            raise IngestError(f"unknown site_id {site_id!r}", line=line)
        day = _parse_date(row["date"], line)
        value = _parse_float(row["tmax_c"], "tmax_c", line)
        if not np.isfinite(value):
            raise IngestError(f"tmax_c must be finite, got {row['tmax_c']!r}", line=line)
        position = season_day(day)
        if position is None:
            skipped += 1
            continue
        key = (day.year, position, column[site_id])
        if key in cells:
            raise IngestError(
                f"duplicate observation for site {site_id!r} on {day.isoformat()} (first on line {cells[key][1]})",
                line=line,
            )
        cells[key] = (value, line)

    if skipped:
        logger.info(f"Skipped {skipped} row(s) outside the May-September window")
    if not cells:
        raise EmptyPanelError(f"{path}: no observations inside the May-September window")

    years = [key[0] for key in cells]
    first_year, last_year = min(years), max(years)
    observed_days = max(key[1] for key in cells)
    if n_days is None:
        n_days = observed_days
    elif observed_days > n_days:
        raise IngestError(f"observations reach season day {observed_days} but n_days is {n_days}")

    values = np.full((last_year - first_year + 1, n_days, len(sites)), np.nan)
    for (year, position, i), (value, _) in cells.items():
        values[year - first_year, position - 1, i] = value

    dataset = PanelDataset(
        sites=sites, values=values, day_of_year_offset=day_of_year_offset, first_year=first_year,
    )
    for site_id, fraction in dataset.completeness().items():
        logger.info(f"Site {site_id}: {100.0 * fraction:.1f}% of days observed")
    return dataset


def ingest(sites_path: PathLike, observations_path: PathLike, coordinates: str = "planar",
           n_days: Optional[int] = None, day_of_year_offset: int = DEFAULT_DAY_OF_YEAR_OFFSET) -> PanelDataset:
    """Read a site file and an observation file into a validated panel."""
    sites = read_sites(sites_path, coordinates=coordinates)
    if not sites:
        raise EmptyPanelError(f"{sites_path}: no sites")
    return read_observations(observations_path, sites, n_days=n_days, day_of_year_offset=day_of_year_offset)
