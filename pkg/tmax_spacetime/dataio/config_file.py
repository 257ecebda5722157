"""Run configuration files: flat YAML mappings overridden by command-line values."""

import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml
from pydantic import ValidationError

from ..exceptions import ConfigurationError
from ..models.config import RunConfig
from ..utils import clean_params

logger = logging.getLogger(__name__)


def _normalize_keys(data: Dict[str, Any]) -> Dict[str, Any]:
    return {str(key).replace("-", "_"): value for key, value in data.items()}


def read_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except (OSError, yaml.YAMLError) as e:
        raise ConfigurationError(f"cannot read config file {path}: {e}")
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"config file {path} must hold a mapping, got {type(data).__name__}")
    return _normalize_keys(data)


def load_config(path: Optional[Union[str, Path]] = None, **overrides) -> RunConfig:
    """RunConfig from an optional YAML file, with ``None`` overrides ignored."""
    data = read_config_file(path) if path is not None else {}
    data.update(_normalize_keys(clean_params(overrides)))
    try:
        config = RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError(f"invalid configuration: {e}")
    if path is not None:
        logger.info(f"Loaded configuration from {path}")
    return config


def dump_config(config: RunConfig, path: Union[str, Path]) -> Path:
    """Write the effective configuration next to the outputs it produced."""
    path = Path(path)
    path.write_text(yaml.safe_dump(config.model_dump(mode="json"), sort_keys=False))
    return path
