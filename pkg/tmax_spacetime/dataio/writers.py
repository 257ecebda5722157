"""Serialized outputs: panels, posterior draws with their run metadata, and reports."""

import json
import logging
import re
from datetime import date, timedelta
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import TypeAdapter

from .ingest import SEASON_DAYS, SEASON_START
from ..diagnostics import export_trace, read_trace
from ..exceptions import DataValidationError
from ..models.chain import SCALAR_NAMES, SITE_FIELD_NAMES, AcceptanceReport, ChainOutput
from ..models.design import CovariateScaling
from ..models.panel import PanelDataset
from ..models.prediction import PredictiveSamples
from ..models.reports import DiagnosticsReport, ParameterSummary
from ..models.site import SiteMeta
from ..models.state import ModelState
from ..models.variant import ModelVariant

logger = logging.getLogger(__name__)

DEFAULT_BASE_YEAR = 2001
FIT_FORMAT_VERSION = 1

PathLike = Union[str, Path]

_SITE_PARAM = re.compile(r"^(?P<name>\w+)\[(?P<site>[^\],]+)\]$")
_PSI_PARAM = re.compile(r"^psi\[(?P<t>\d+)\]$")
_GAMMA_PARAM = re.compile(r"^gamma\[(?P<t>\d+),(?P<site>[^\]]+)\]$")


def write_panel(dataset: PanelDataset, sites_path: PathLike, observations_path: PathLike,
                base_year: Optional[int] = None) -> None:
    """Write the panel in the two CSV formats ``ingest`` reads; missing cells are omitted."""
    if dataset.n_days > SEASON_DAYS:
        raise DataValidationError(f"{dataset.n_days} days do not fit the {SEASON_DAYS}-day season")
    first_year = dataset.first_year or base_year or DEFAULT_BASE_YEAR
    sites = pd.DataFrame(
        [(s.id, s.x, s.y, s.elevation) for s in dataset.sites],
        columns=["id", "x_km", "y_km", "elev_m"],
    )
    sites.to_csv(sites_path, index=False)

    rows = []
    for t in range(dataset.n_years):
        start = date(first_year + t, *SEASON_START)
        for day in range(dataset.n_days):
            stamp = (start + timedelta(days=day)).isoformat()
            for i, site in enumerate(dataset.sites):
                if not dataset.missing[t, day, i]:
                    rows.append((site.id, stamp, dataset.values[t, day, i]))
    pd.DataFrame(rows, columns=["site_id", "date", "tmax_c"]).to_csv(observations_path, index=False)
    logger.info(f"Wrote {len(dataset.sites)} site(s) to {sites_path} and {len(rows)} observation(s) to {observations_path}")


def _fit_metadata(chains: Sequence[ChainOutput]) -> Dict:
    first = chains[0]
    return {
        "format_version": FIT_FORMAT_VERSION,
        "variant": first.variant.model_dump(),
        "sites": [site.model_dump() for site in first.sites],
        "scaling": first.scaling.model_dump(mode="json"),
        "n_years": first.n_years,
        "n_days": first.n_days,
        "day_of_year_offset": first.day_of_year_offset,
        "first_year": first.first_year,
        "held": list(first.held),
        "rescaled": first.rescaled,
        "intercept_mode": first.intercept_mode,
        "chains": [
            {
                "chain_index": c.chain_index,
                "seed": c.seed,
                "iterations": c.iterations,
                "burn_in": c.burn_in,
                "thin": c.thin,
                "acceptance": c.acceptance.model_dump(mode="json"),
            }
            for c in chains
        ],
    }


def write_fit(chains: Sequence[ChainOutput], directory: PathLike) -> Dict[str, Path]:
    """``draws.csv`` (long trace) plus ``fit.json`` (everything needed to rebuild the chains)."""
    if not chains:
        raise ValueError("no chains to write")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    draws_path = export_trace(chains, directory / "draws.csv")
    fit_path = directory / "fit.json"
    fit_path.write_text(json.dumps(_fit_metadata(chains), indent=2))
    return {"draws": draws_path, "fit": fit_path}


def _chain_arrays(frame: pd.DataFrame, sites: List[str], n_years: int) -> Dict:
    wide = frame.pivot(index="iter", columns="param", values="value").sort_index()
    column = {site_id: i for i, site_id in enumerate(sites)}
    n = len(wide)
    scalars = {name: wide[name].to_numpy() for name in SCALAR_NAMES}
    fields = {name: np.zeros((n, len(sites))) for name in SITE_FIELD_NAMES}
    psi = np.zeros((n, n_years))
    gamma = np.zeros((n, n_years, len(sites)))
    for param in wide.columns:
        values = wide[param].to_numpy()
        match = _GAMMA_PARAM.match(param)
        if match:
            gamma[:, int(match["t"]) - 1, column[match["site"]]] = values
            continue
        match = _PSI_PARAM.match(param)
        if match:
            psi[:, int(match["t"]) - 1] = values
            continue
        match = _SITE_PARAM.match(param)
        if match and match["name"] in fields:
            fields[match["name"]][:, column[match["site"]]] = values
    return {
        "draw_iterations": wide.index.to_numpy(dtype=int),
        "scalars": scalars,
        "site_fields": fields,
        "psi": psi,
        "gamma": gamma,
    }


def read_fit(directory: PathLike) -> List[ChainOutput]:
    """Rebuild the chains written by ``write_fit``."""
    directory = Path(directory)
    meta = json.loads((directory / "fit.json").read_text())
    trace = read_trace(directory / "draws.csv")
    sites = [SiteMeta.model_validate(site) for site in meta["sites"]]
    site_ids = [site.id for site in sites]
    chains = []
    for info in meta["chains"]:
        arrays = _chain_arrays(trace[trace["chain"] == info["chain_index"]], site_ids, meta["n_years"])
        chains.append(ChainOutput(
            chain_index=info["chain_index"],
            seed=info["seed"],
            iterations=info["iterations"],
            burn_in=info["burn_in"],
            thin=info["thin"],
            variant=ModelVariant.model_validate(meta["variant"]),
            sites=sites,
            scaling=CovariateScaling.model_validate(meta["scaling"]),
            n_years=meta["n_years"],
            n_days=meta["n_days"],
            day_of_year_offset=meta["day_of_year_offset"],
            first_year=meta["first_year"],
            acceptance=AcceptanceReport.model_validate(info["acceptance"]),
            held=meta["held"],
            rescaled=meta["rescaled"],
            intercept_mode=meta["intercept_mode"],
            **arrays,
        ))
    logger.info(f"Read {len(chains)} chain(s) from {directory}")
    return chains


_SUMMARY_ADAPTER = TypeAdapter(Dict[str, ParameterSummary])


def write_summary(summary: Dict[str, ParameterSummary], path: PathLike) -> Path:
    """Posterior summary JSON, keys in reporting order."""
    path = Path(path)
    path.write_bytes(_SUMMARY_ADAPTER.dump_json(summary, indent=2))
    return path


def write_diagnostics(report: DiagnosticsReport, path: PathLike) -> Path:
    path = Path(path)
    path.write_text(report.model_dump_json(indent=2))
    return path


def write_predictions(pred: PredictiveSamples, path: PathLike, level: float = 0.90) -> Path:
    """``year,day,mean,lower,upper`` over the predicted cells."""
    path = Path(path)
    pred.to_frame(level).to_csv(path, index=False)
    return path


def write_frame(frame: pd.DataFrame, path: PathLike) -> Path:
    path = Path(path)
    frame.to_csv(path, index=False)
    logger.info(f"Wrote {len(frame)} row(s) to {path}")
    return path


def state_to_dict(state: ModelState) -> Dict:
    """JSON-ready view of a parameter state."""
    return {
        "fixed": state.fixed.model_dump(),
        "hyper": state.hyper.model_dump(),
        "latents": {name: getattr(state.latents, name).tolist() for name in SITE_FIELD_NAMES},
        "psi": state.temporal.psi.tolist(),
        "gamma": state.temporal.gamma.tolist(),
    }


def write_truth(state: ModelState, path: PathLike, extra: Optional[Dict] = None) -> Path:
    path = Path(path)
    payload = dict(extra or {})
    payload["state"] = state_to_dict(state)
    path.write_text(json.dumps(payload, indent=2))
    return path
