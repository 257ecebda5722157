# spatial/kernels.py

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.spatial.distance import cdist, pdist, squareform

from ..exceptions import FactorizationError, TmaxModelError
from ..models.site import SiteMeta

logger = logging.getLogger(__name__)

JITTER_LADDER = (0.0, 1e-10, 1e-8)


def coordinates(sites: Sequence[SiteMeta]) -> np.ndarray:
    return np.array([[site.x, site.y] for site in sites], dtype=float).reshape(-1, 2)


def distance_matrix(sites: Sequence[SiteMeta]) -> np.ndarray:
    """Euclidean distances (km) between all pairs of sites."""
    xy = coordinates(sites)
    if len(xy) < 2:
        return np.zeros((len(xy), len(xy)))
    return squareform(pdist(xy))


def distances_to(sites: Sequence[SiteMeta], x: float, y: float) -> np.ndarray:
    return cdist(coordinates(sites), np.array([[x, y]], dtype=float))[:, 0]


def max_distance(sites: Sequence[SiteMeta]) -> float:
    if len(sites) < 2:
        raise TmaxModelError("the maximum inter-site distance needs at least two sites")
    return float(pdist(coordinates(sites)).max())


def default_phi(sites: Sequence[SiteMeta]) -> float:
    """Decay whose correlation falls to exp(-3) at the largest inter-site distance."""
    d_max = max_distance(sites)
    if not d_max > 0:
        raise TmaxModelError("all sites share one location; the decay is undefined")
    return 3.0 / d_max


def phi_support(sites: Sequence[SiteMeta], mode_size: int, fixed: Optional[float] = None,
                grid: Optional[List[float]] = None) -> np.ndarray:
    """Candidate decays: one value in fixed mode, otherwise ``mode_size`` values.

    The default grid spans effective ranges from 10% to 100% of the largest
    inter-site distance.
    """
    if len(sites) < 2:
        # a single site has R = [[1]] for every decay
        return np.array([fixed if fixed is not None else 1.0])
    if mode_size == 1:
        return np.array([fixed if fixed is not None else default_phi(sites)])
    if grid is not None:
        return np.array(sorted(grid), dtype=float)
    fractions = np.linspace(0.1, 1.0, mode_size)
    return 3.0 / (max_distance(sites) * fractions)


def _closest_pair(distances: np.ndarray, ids: Sequence[str]) -> Optional[Tuple[str, str]]:
    n = len(ids)
    if n < 2:
        return None
    masked = distances + np.diag(np.full(n, np.inf))
    j, k = np.unravel_index(np.argmin(masked), masked.shape)
    return ids[min(j, k)], ids[max(j, k)]


def factorize(matrix: np.ndarray, context: str = "matrix", ids: Optional[Sequence[str]] = None,
              distances: Optional[np.ndarray] = None):
    """Cholesky factor with a diagonal jitter ladder; returns (factor, jitter used)."""
    scale = float(np.mean(np.diag(matrix))) if matrix.size else 1.0
    for step in JITTER_LADDER:
        jitter = step * scale
        try:
            factor = cho_factor(matrix + jitter * np.eye(len(matrix)), lower=True, check_finite=True)
        except (LinAlgError, ValueError):
            continue
        if jitter > 0:
            logger.warning(f"{context}: added diagonal jitter {jitter:.3g} to factorize")
        return factor, jitter
    pair = _closest_pair(distances, ids) if distances is not None and ids is not None else None
    raise FactorizationError(f"{context} is not positive definite", pair=pair)


class CorrelationMatrix:
    """Exponential correlation R(phi) with cached Cholesky factor, log-determinant and inverse."""

    def __init__(self, distances: np.ndarray, phi: float, ids: Optional[Sequence[str]] = None):
        if not phi > 0:
            raise ValueError(f"decay must be > 0, got {phi}")
        self.phi = float(phi)
        self.distances = distances
        self.ids = list(ids) if ids is not None else [str(i) for i in range(len(distances))]
        self.matrix = np.exp(-self.phi * distances)
        self.factor, self.jitter = factorize(
            self.matrix, context=f"R(phi={self.phi:.4g})", ids=self.ids, distances=distances
        )
        chol = self.factor[0]
        self.log_det = 2.0 * float(np.sum(np.log(np.diag(chol))))
        self.precision = cho_solve(self.factor, np.eye(len(distances)))
        self.precision = 0.5 * (self.precision + self.precision.T)

    @property
    def size(self) -> int:
        return len(self.matrix)

    def solve(self, b: np.ndarray) -> np.ndarray:
        return cho_solve(self.factor, b)

    def quad(self, x: np.ndarray) -> float:
        """x' R^{-1} x."""
        x = np.asarray(x, dtype=float)
        return float(x @ self.solve(x))

    @property
    def total_precision(self) -> float:
        """1' R^{-1} 1, the sum of all precision entries."""
        return float(self.precision.sum())


def _check_distinct(distances: np.ndarray, ids: Sequence[str]) -> None:
    n = len(ids)
    if n < 2:
        return
    off = distances + np.diag(np.full(n, np.inf))
    if np.any(off == 0.0):
        pair = _closest_pair(distances, ids)
        raise FactorizationError("duplicate site coordinates make the correlation matrix singular", pair=pair)


def exp_correlation(sites: Sequence[SiteMeta], phi: float) -> CorrelationMatrix:
    """Correlation matrix exp(-phi * d_jk) over ``sites``."""
    if not sites:
        raise ValueError("at least one site is required")
    ids = [site.id for site in sites]
    distances = distance_matrix(sites)
    _check_distinct(distances, ids)
    return CorrelationMatrix(distances, phi, ids)


class CorrelationCache:
    """Correlation matrices of one site layout, keyed by decay. Read-only once built."""

    def __init__(self, sites: Sequence[SiteMeta]):
        self.ids = [site.id for site in sites]
        self.distances = distance_matrix(sites)
        _check_distinct(self.distances, self.ids)
        self._matrices: Dict[float, CorrelationMatrix] = {}

    def get(self, phi: float) -> CorrelationMatrix:
        key = float(phi)
        matrix = self._matrices.get(key)
        if matrix is None:
            matrix = CorrelationMatrix(self.distances, key, self.ids)
            self._matrices[key] = matrix
        return matrix

    def precompute(self, phis: Sequence[float]) -> List[CorrelationMatrix]:
        return [self.get(phi) for phi in phis]
