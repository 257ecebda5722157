# spatial/kriging.py

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_solve, solve

from .kernels import factorize
from ..exceptions import NumericalDegeneracyError, create_exception_from_linalg

VARIANCE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class KrigingSystem:
    """Joint Gaussian of W(s0) and the observed W(s_1..s_I)."""

    mu0: float
    mu: np.ndarray
    sigma00: float
    sigma_i0: np.ndarray
    sigma: np.ndarray
    w: np.ndarray

    @classmethod
    def from_correlation(cls, mean: float, variance: float, correlation: np.ndarray,
                         cross: np.ndarray, w: np.ndarray) -> "KrigingSystem":
        """Stationary field with constant mean, sill ``variance`` and correlations."""
        n = len(w)
        return cls(
            mu0=float(mean),
            mu=np.full(n, float(mean)),
            sigma00=float(variance),
            sigma_i0=variance * np.asarray(cross, dtype=float),
            sigma=variance * np.asarray(correlation, dtype=float),
            w=np.asarray(w, dtype=float),
        )


def clamp_variance(variance, reference: float = 1.0):
    """Clamp round-off negatives to zero; larger negatives mean a broken system."""
    variance = np.asarray(variance, dtype=float)
    tolerance = VARIANCE_TOLERANCE * max(1.0, abs(reference))
    if np.any(variance < -tolerance):
        raise NumericalDegeneracyError(f"conditional variance {variance.min():.3g} is negative")
    return np.maximum(variance, 0.0)


def simple_kriging_weights(system: KrigingSystem) -> Tuple[np.ndarray, float]:
    """Weights S^-1 S_i0 and conditional variance S00 - S_i0' S^-1 S_i0."""
    factor, _ = factorize(system.sigma, context="kriging covariance")
    weights = cho_solve(factor, system.sigma_i0)
    variance = system.sigma00 - float(weights @ system.sigma_i0)
    return weights, float(clamp_variance(variance, system.sigma00))


def krige_conditional(system: KrigingSystem) -> Tuple[float, float]:
    """Mean mu0 + S_i0' S^-1 (w - mu) and variance S00 - S_i0' S^-1 S_i0."""
    weights, variance = simple_kriging_weights(system)
    return system.mu0 + float(weights @ (system.w - system.mu)), variance


def ordinary_kriging_weights(covariance: np.ndarray, cross: np.ndarray) -> np.ndarray:
    """Weights of the ordinary-kriging system with the unbiasedness row (weights sum to 1)."""
    n = len(cross)
    system = np.zeros((n + 1, n + 1))
    system[:n, :n] = covariance
    system[n, :n] = 1.0
    system[:n, n] = 1.0
    rhs = np.append(np.asarray(cross, dtype=float), 1.0)
    try:
        solution = solve(system, rhs, assume_a="sym")
    except (LinAlgError, ValueError) as e:
        raise create_exception_from_linalg(e, "ordinary kriging system")
    return solution[:n]
