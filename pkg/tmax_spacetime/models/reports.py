# models/reports.py

import math
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


class SiteScore(BaseModel):
    """Predictive scores of one held-out site (degrees C, CVG as a proportion)."""

    model_config = ConfigDict(extra="forbid")

    site: str
    rmse: float
    mae: float
    crps: float
    cvg: float
    n_cells: int = 0
    error: Optional[str] = None

    @classmethod
    def failed(cls, site: str, error: str) -> "SiteScore":
        nan = float("nan")
        return cls(site=site, rmse=nan, mae=nan, crps=nan, cvg=nan, error=error)

    @property
    def ok(self) -> bool:
        return self.error is None


class ChangeSummary(BaseModel):
    """Change between two windows of years: difference of means and ratio of sds."""

    model_config = ConfigDict(arbitrary_types_allowed=True, extra="forbid")

    site: str
    window1: List[int]
    window2: List[int]
    delta_mean: float
    q_sd: float
    delta_samples: Optional[np.ndarray] = None
    delta_interval: Optional[List[float]] = None
    prob_positive: Optional[float] = None

    @field_validator("q_sd")
    @classmethod
    def _positive(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("sd quotient must be > 0")
        return value

    def as_dict(self) -> Dict[str, object]:
        return self.model_dump(exclude={"delta_samples"})


class ParameterSummary(BaseModel):
    """Posterior mean and equal-tailed 90% interval."""

    model_config = ConfigDict(extra="forbid")

    mean: float
    q05: float
    q95: float

    @classmethod
    def from_samples(cls, samples: np.ndarray) -> "ParameterSummary":
        samples = np.asarray(samples, dtype=float)
        return cls(
            mean=float(samples.mean()),
            q05=float(np.percentile(samples, 5.0)),
            q95=float(np.percentile(samples, 95.0)),
        )


class DiagnosticsReport(BaseModel):
    """Convergence summary: R-hat on the long thinned view, ESS on the inference view."""

    model_config = ConfigDict(extra="forbid")

    rhat: Dict[str, float] = Field(default_factory=dict)
    ess: Dict[str, float] = Field(default_factory=dict)
    acceptance: Dict[str, float] = Field(default_factory=dict)
    n_chains: int
    rhat_draws_per_chain: int
    ess_draws_per_chain: int
    rhat_threshold: float = 1.2

    @property
    def max_rhat(self) -> float:
        values = [v for v in self.rhat.values() if not math.isnan(v)]
        return max(values) if values else float("nan")

    @property
    def converged(self) -> bool:
        return all(v < self.rhat_threshold for v in self.rhat.values())

    def failing(self) -> List[str]:
        return [name for name, value in self.rhat.items() if not value < self.rhat_threshold]


class LocalState(BaseModel):
    """Parameters of the independent single-site model (original covariate units)."""

    model_config = ConfigDict(arbitrary_types_allowed=True, extra="forbid")

    beta0: float
    alpha: float
    beta1: float
    beta2: float
    rho_y: float
    sigma2_lambda: float
    sigma2_eps: float
    psi: np.ndarray

    @field_validator("rho_y")
    @classmethod
    def _rho_inside(cls, value: float) -> float:
        if not -1.0 < value < 1.0:
            raise ValueError("rho_y must lie in (-1, 1)")
        return value

    @field_validator("sigma2_lambda", "sigma2_eps")
    @classmethod
    def _positive(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("variances must be > 0")
        return value


class LoocvResult(BaseModel):
    """Leave-one-site-out scores per variant, variants in lattice order."""

    model_config = ConfigDict(extra="forbid")

    variants: List[str] = Field(default_factory=list)
    labels: Dict[str, str] = Field(default_factory=dict)
    scores: Dict[str, List[SiteScore]] = Field(default_factory=dict)

    def add(self, variant: str, label: str, scores: List[SiteScore]) -> None:
        if variant not in self.variants:
            self.variants.append(variant)
        self.labels[variant] = label
        self.scores[variant] = list(scores)

    def means(self, variant: str) -> Dict[str, float]:
        """Arithmetic mean over the sites that scored."""
        ok = [s for s in self.scores[variant] if s.ok]
        if not ok:
            return {metric: float("nan") for metric in METRICS}
        return {metric: float(np.mean([getattr(s, metric) for s in ok])) for metric in METRICS}

    def failures(self) -> List[str]:
        return [f"{v}/{s.site}: {s.error}" for v in self.variants for s in self.scores[v] if not s.ok]


METRICS = ("rmse", "mae", "crps", "cvg")
