"""Command-line entry point: ``tmax-spacetime <subcommand> ...``."""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd
import yaml

from . import __version__
from .dataio import (
    dump_config,
    ingest,
    load_config,
    read_fit,
    write_diagnostics,
    write_fit,
    write_frame,
    write_panel,
    write_predictions,
    write_summary,
    write_truth,
)
from .diagnostics import diagnose
from .evaluation.change import change_table
from .evaluation.loocv import loocv_frame, run_loocv
from .exceptions import ConfigurationError, TmaxModelError, exit_code_for
from .local_model import compare_local_vs_full, fit_local
from .models.chain import pool_chains
from .models.panel import DEFAULT_DAY_OF_YEAR_OFFSET
from .models.variant import STANDARD_LATTICE
from .predictor import compose_panel, compose_series, impute_missing
from .sampler.chain import run_chains
from .simulation import GeneratorSpec, grid_sites, simulate_panel, reference_spec
from .summary import posterior_summary, summary_frame
from .utils import derive_seed, parse_window

logger = logging.getLogger("tmax_spacetime")

PREDICTION_STREAM = 1


def _add_data_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--sites", required=True, help="Sites CSV (id,x_km,y_km,elev_m)")
    parser.add_argument("--observations", required=True, help="Observations CSV (site_id,date,tmax_c)")
    parser.add_argument("--coordinates", choices=["planar", "lonlat"], default="planar",
                        help="Site coordinate columns: planar km or lon/lat degrees")
    parser.add_argument("--n-days", type=int, default=None, help="Season length (default: last observed day)")
    parser.add_argument("--day-of-year-offset", type=int, default=None,
                        help="Calendar day before season day 1 in the harmonics (default 120; 0 for day-of-year)")


def _add_run_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", default=None, help="YAML run configuration")
    parser.add_argument("--variant", default=None, help="Model variant, e.g. M4 or M1:beta0")
    parser.add_argument("--chains", type=int, default=None)
    parser.add_argument("--iterations", type=int, default=None)
    parser.add_argument("--burn-in", type=int, default=None)
    parser.add_argument("--thin", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--phi-mode", default=None, help="'fixed' or 'grid:n'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tmax-spacetime",
        description="Bayesian space-time modelling of daily maximum temperatures",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--jobs", type=int, default=None, help="Worker processes for chains, folds or sites")
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="Fit the model and write draws, run metadata and a summary")
    _add_data_args(fit)
    _add_run_args(fit)
    fit.add_argument("--out", required=True, help="Output directory")

    predict = sub.add_parser("predict", help="Posterior-predictive series at a new site")
    _add_data_args(predict)
    predict.add_argument("--fit", required=True, help="Directory written by 'fit'")
    predict.add_argument("--site-x", type=float, required=True)
    predict.add_argument("--site-y", type=float, required=True)
    predict.add_argument("--elev", type=float, required=True)
    predict.add_argument("--year", type=int, default=None, help="Calendar year (default: every fitted year)")
    predict.add_argument("--through-day", type=int, default=None)
    predict.add_argument("--seed", type=int, default=None)
    predict.add_argument("--out", default=None, help="Output CSV (default: standard output)")

    impute = sub.add_parser("impute", help="Fill the missing days of an observed site")
    _add_data_args(impute)
    impute.add_argument("--fit", required=True, help="Directory written by 'fit'")
    impute.add_argument("--site-id", required=True)
    impute.add_argument("--seed", type=int, default=None)
    impute.add_argument("--out", default=None)

    loocv = sub.add_parser("loocv", help="Leave-one-site-out comparison of model variants")
    _add_data_args(loocv)
    _add_run_args(loocv)
    loocv.add_argument("--variants", nargs="+", default=None, help="Variants to compare (default: all nine)")
    loocv.add_argument("--out", default=None)

    diag = sub.add_parser("diagnose", help="R-hat, ESS and acceptance of a fit")
    diag.add_argument("--fit", required=True, help="Directory written by 'fit'")
    diag.add_argument("--rhat-draws", type=int, default=None)
    diag.add_argument("--ess-draws", type=int, default=None)
    diag.add_argument("--out", default=None, help="Output JSON (default: standard output)")

    sim = sub.add_parser("simulate", help="Draw a synthetic panel with known truth")
    sim.add_argument("--spec", required=True, help="YAML generator specification")
    sim.add_argument("--out", required=True, help="Output directory")

    local = sub.add_parser("local-fit", help="Independent single-site model")
    _add_data_args(local)
    _add_run_args(local)
    local.add_argument("--site-id", nargs="+", required=True)
    local.add_argument("--full-fit", default=None, help="Compare against this 'fit' directory")
    local.add_argument("--out", required=True, help="Output directory")

    change = sub.add_parser("change-summary", help="Window means, sds and their change per site")
    _add_data_args(change)
    change.add_argument("--window1", required=True, help="e.g. 1956-1985")
    change.add_argument("--window2", required=True, help="e.g. 1986-2015")
    change.add_argument("--out", default=None)

    return parser


def _run_config(args: argparse.Namespace):
    return load_config(
        args.config,
        variant=args.variant,
        chains=args.chains,
        iterations=args.iterations,
        burn_in=args.burn_in,
        thin=args.thin,
        seed=args.seed,
        phi_mode=args.phi_mode,
        day_of_year_offset=args.day_of_year_offset,
        jobs=args.jobs,
        sites_path=args.sites,
        observations_path=args.observations,
    )


def _dataset(args: argparse.Namespace, offset: Optional[int] = None):
    """Ingest the data arguments; ``--day-of-year-offset`` wins over ``offset`` from a config or fit."""
    if args.day_of_year_offset is not None:
        offset = args.day_of_year_offset
    return ingest(args.sites, args.observations, coordinates=args.coordinates, n_days=args.n_days,
                  day_of_year_offset=DEFAULT_DAY_OF_YEAR_OFFSET if offset is None else offset)


def _emit_frame(frame: pd.DataFrame, out: Optional[str]) -> None:
    if out:
        write_frame(frame, out)
    else:
        frame.to_csv(sys.stdout, index=False)


def _cmd_fit(args: argparse.Namespace) -> None:
    config = _run_config(args)
    dataset = _dataset(args, config.day_of_year_offset)
    chains = run_chains(dataset, config, jobs=args.jobs)
    out = Path(args.out)
    write_fit(chains, out)
    write_summary(posterior_summary(pool_chains(chains)), out / "summary.json")
    dump_config(config, out / "config.yaml")


def _prediction_rng(seed: Optional[int], chains) -> np.random.Generator:
    base = chains[0].seed if seed is None else seed
    return np.random.default_rng(derive_seed(base, PREDICTION_STREAM))


def _cmd_predict(args: argparse.Namespace) -> None:
    chains = read_fit(args.fit)
    dataset = _dataset(args, chains[0].day_of_year_offset)
    draws = pool_chains(chains)
    rng = _prediction_rng(args.seed, chains)
    if args.year is None:
        pred = compose_panel(draws, args.site_x, args.site_y, args.elev, rng, dataset=dataset,
                             through_day=args.through_day)
    else:
        pred = compose_series(draws, args.site_x, args.site_y, args.elev, dataset.year_index(args.year),
                              args.through_day or draws.n_days, rng, dataset=dataset)
    _emit_predictions(pred, args.out)


def _emit_predictions(pred, out: Optional[str]) -> None:
    if out:
        write_predictions(pred, out)
    else:
        pred.to_frame().to_csv(sys.stdout, index=False)


def _cmd_impute(args: argparse.Namespace) -> None:
    chains = read_fit(args.fit)
    dataset = _dataset(args, chains[0].day_of_year_offset)
    pred = impute_missing(pool_chains(chains), dataset, args.site_id, _prediction_rng(args.seed, chains))
    _emit_predictions(pred, args.out)


def _cmd_loocv(args: argparse.Namespace) -> None:
    config = _run_config(args)
    dataset = _dataset(args, config.day_of_year_offset)
    result = run_loocv(dataset, config, args.variants or STANDARD_LATTICE, jobs=args.jobs)
    _emit_frame(loocv_frame(result), args.out)


def _cmd_diagnose(args: argparse.Namespace) -> None:
    report = diagnose(read_fit(args.fit), rhat_target=args.rhat_draws, inference_target=args.ess_draws)
    if args.out:
        write_diagnostics(report, args.out)
    else:
        sys.stdout.write(report.model_dump_json(indent=2) + "\n")


def _load_generator_spec(path: str) -> GeneratorSpec:
    """A generator spec from YAML. ``preset: reference`` starts from the reported posterior
    means; without ``sites`` a lattice of ``n_sites`` stations is laid out."""
    try:
        data = yaml.safe_load(Path(path).read_text()) or {}
    except (OSError, yaml.YAMLError) as e:
        raise ConfigurationError(f"cannot read generator spec {path}: {e}")
    if not isinstance(data, dict):
        raise ConfigurationError(f"generator spec {path} must hold a mapping")
    data = {str(k).replace("-", "_"): v for k, v in data.items()}
    preset = data.pop("preset", None)
    if "sites" not in data:
        n_sites = data.pop("n_sites", None)
        if n_sites is None:
            raise ConfigurationError("generator spec needs 'sites' or 'n_sites'")
        data["sites"] = grid_sites(int(n_sites), spacing_km=float(data.pop("spacing_km", 50.0)),
                                   seed=int(data.get("seed", 0)))
    try:
        if preset == "reference":
            return reference_spec(**data)
        if preset is not None:
            raise ConfigurationError(f"unknown generator preset {preset!r}")
        return GeneratorSpec.model_validate(data)
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"invalid generator spec: {e}")


def _cmd_simulate(args: argparse.Namespace) -> None:
    spec = _load_generator_spec(args.spec)
    dataset, truth = simulate_panel(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_panel(dataset, out / "sites.csv", out / "observations.csv")
    write_truth(truth, out / "truth.json", extra={"spec": json.loads(spec.model_dump_json())})


def _cmd_local_fit(args: argparse.Namespace) -> None:
    config = _run_config(args)
    dataset = _dataset(args, config.day_of_year_offset)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fits = {}
    for site_id in args.site_id:
        chains = fit_local(dataset, site_id, config, jobs=args.jobs)
        fits[site_id] = pool_chains(chains)
        write_frame(summary_frame(posterior_summary(fits[site_id])), out / f"summary_{site_id}.csv")
    if args.full_fit:
        full = pool_chains(read_fit(args.full_fit)).select_sites(list(fits))
        write_frame(compare_local_vs_full(fits, full), out / "overlap.csv")


def _cmd_change_summary(args: argparse.Namespace) -> None:
    dataset = _dataset(args)
    window1, window2 = parse_window(args.window1), parse_window(args.window2)
    _emit_frame(change_table(dataset, window1, window2), args.out)


COMMANDS = {
    "fit": _cmd_fit,
    "predict": _cmd_predict,
    "impute": _cmd_impute,
    "loocv": _cmd_loocv,
    "diagnose": _cmd_diagnose,
    "simulate": _cmd_simulate,
    "local-fit": _cmd_local_fit,
    "change-summary": _cmd_change_summary,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        COMMANDS[args.command](args)
    except TmaxModelError as e:
        logger.error(e.message)
        return exit_code_for(e)
    except ValueError as e:
        logger.error(str(e))
        return 2
    except OSError as e:
        logger.error(str(e))
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
