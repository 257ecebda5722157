from .site import SiteMeta
from .panel import PanelDataset, DEFAULT_DAY_OF_YEAR_OFFSET
from .design import AffineScale, CovariateScaling, HarmonicBasis, ModelDesign, ScalingPolicy
from .variant import FieldName, ModelVariant, STANDARD_LATTICE, standard_lattice
from .state import FixedEffects, HyperState, ModelState, SiteLatents, TemporalEffects
from .priors import GaussianPrior, HyperPriors, InverseGammaPrior
from .chain import AcceptanceReport, ChainOutput, pool_chains, site_field_key
from .prediction import PredictiveSamples
from .reports import ChangeSummary, DiagnosticsReport, LocalState, LoocvResult, ParameterSummary, SiteScore
from .config import ChainSettings, RunConfig, chain_settings

__all__ = [
    "SiteMeta",
    "PanelDataset",
    "DEFAULT_DAY_OF_YEAR_OFFSET",
    "AffineScale",
    "CovariateScaling",
    "HarmonicBasis",
    "ModelDesign",
    "ScalingPolicy",
    "FieldName",
    "ModelVariant",
    "STANDARD_LATTICE",
    "standard_lattice",
    "FixedEffects",
    "HyperState",
    "ModelState",
    "SiteLatents",
    "TemporalEffects",
    "GaussianPrior",
    "HyperPriors",
    "InverseGammaPrior",
    "AcceptanceReport",
    "ChainOutput",
    "pool_chains",
    "site_field_key",
    "PredictiveSamples",
    "ChangeSummary",
    "DiagnosticsReport",
    "LocalState",
    "LoocvResult",
    "ParameterSummary",
    "SiteScore",
    "ChainSettings",
    "RunConfig",
    "chain_settings",
]
