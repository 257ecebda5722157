# spatial/gaussian.py

from typing import Iterable, Tuple

import numpy as np
from scipy.special import gammaln

from .kernels import CorrelationMatrix
from ..exceptions import NumericalDegeneracyError

LOG_2PI = float(np.log(2.0 * np.pi))


def combine_normals(terms: Iterable[Tuple[float, float]]) -> Tuple[float, float]:
    """Product of N(mean_i, var_i) densities, normalised: precision-weighted mean and variance."""
    terms = list(terms)
    if not terms:
        raise ValueError("combine_normals needs at least one (mean, variance) term")
    precision = 0.0
    weighted = 0.0
    for mean, variance in terms:
        if not variance > 0:
            raise ValueError(f"variances must be > 0, got {variance}")
        precision += 1.0 / variance
        weighted += mean / variance
    return weighted / precision, 1.0 / precision


def combine_precisions(precisions, weighted_means, context: str = "full conditional"):
    """Precision form of combine_normals; inputs are (sum of precisions, sum of precision * mean).

    Works elementwise on arrays. A term with zero precision carries no information.
    """
    precision = np.asarray(precisions, dtype=float)
    if np.any(precision <= 0) or not np.all(np.isfinite(precision)):
        raise NumericalDegeneracyError(f"{context}: precision must be finite and > 0")
    return np.asarray(weighted_means, dtype=float) / precision, 1.0 / precision


def normal_logpdf(x, mean, variance):
    x = np.asarray(x, dtype=float)
    return -0.5 * (LOG_2PI + np.log(variance) + (x - mean) ** 2 / variance)


def mvn_logpdf_centered(x: np.ndarray, mean: float, variance: float, correlation: CorrelationMatrix) -> float:
    """log N(x | mean * 1, variance * R)."""
    if not variance > 0:
        raise ValueError(f"variance must be > 0, got {variance}")
    x = np.asarray(x, dtype=float)
    if x.shape != (correlation.size,):
        raise ValueError(f"vector of length {x.shape} does not match a {correlation.size}-site correlation")
    n = correlation.size
    resid = x - mean
    return -0.5 * (
        n * LOG_2PI + n * np.log(variance) + correlation.log_det + correlation.quad(resid) / variance
    )


def inverse_gamma_logpdf(x: float, shape: float, rate: float) -> float:
    """log density of sigma^2 = x under IG(shape, rate)."""
    return float(shape * np.log(rate) - gammaln(shape) - (shape + 1.0) * np.log(x) - rate / x)
