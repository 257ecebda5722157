# tmax-spacetime - hierarchical Bayesian space-time model for daily maximum temperatures

__version__ = "0.1.0"

from .session import SpaceTimeSession
from .exceptions import (
    TmaxModelError,
    EmptyPanelError,
    DataValidationError,
    IngestError,
    FactorizationError,
    NumericalDegeneracyError,
    NonFiniteStateError,
    RescaleError,
    InsufficientDrawsError,
    ConfigurationError,
    ScoringError,
    SiteMismatchError,
)
from .models import (
    ChainOutput,
    HyperPriors,
    ModelState,
    ModelVariant,
    PanelDataset,
    PredictiveSamples,
    RunConfig,
    SiteMeta,
)
from .sampler import run_chain, run_chains
from .predictor import compose_panel, compose_series, impute_missing
from .diagnostics import diagnose, ess, rhat
from .simulation import GeneratorSpec, simulate_panel, reference_spec
from .summary import posterior_summary

__all__ = [
    "SpaceTimeSession",
    "TmaxModelError",
    "EmptyPanelError",
    "DataValidationError",
    "IngestError",
    "FactorizationError",
    "NumericalDegeneracyError",
    "NonFiniteStateError",
    "RescaleError",
    "InsufficientDrawsError",
    "ConfigurationError",
    "ScoringError",
    "SiteMismatchError",
    "ChainOutput",
    "HyperPriors",
    "ModelState",
    "ModelVariant",
    "PanelDataset",
    "PredictiveSamples",
    "RunConfig",
    "SiteMeta",
    "run_chain",
    "run_chains",
    "compose_panel",
    "compose_series",
    "impute_missing",
    "diagnose",
    "ess",
    "rhat",
    "GeneratorSpec",
    "simulate_panel",
    "reference_spec",
    "posterior_summary",
]
