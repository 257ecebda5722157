from .config_file import dump_config, load_config, read_config_file
from .ingest import ingest, project_lonlat, read_observations, read_sites, season_day
from .writers import (
    read_fit,
    state_to_dict,
    write_diagnostics,
    write_fit,
    write_frame,
    write_panel,
    write_predictions,
    write_summary,
    write_truth,
)

__all__ = [
    "dump_config",
    "ingest",
    "load_config",
    "project_lonlat",
    "read_config_file",
    "read_fit",
    "read_observations",
    "read_sites",
    "season_day",
    "state_to_dict",
    "write_diagnostics",
    "write_fit",
    "write_frame",
    "write_panel",
    "write_predictions",
    "write_summary",
    "write_truth",
]
