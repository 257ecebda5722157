# sampler/workspace.py

import logging
from typing import Optional, Tuple

import numpy as np

from ..exceptions import DataValidationError
from ..models.design import ModelDesign
from ..models.panel import PanelDataset
from ..models.state import ModelState

logger = logging.getLogger(__name__)


class ResidualWorkspace:
    """Cached residuals X[t, l, i] = Y - (mu + gamma) over the site-years used in the likelihood.

    Only complete site-years enter the likelihood; other cells hold zero in X.
    Any parameter change that moves the mean must go through ``shift`` (or a
    full ``refresh``) so the lag statistics stay consistent.
    """

    def __init__(self, dataset: PanelDataset, design: ModelDesign, drop_rule: str = "site-year",
                 values: Optional[np.ndarray] = None):
        self.design = design
        self.n_years, self.n_days, self.n_sites = dataset.values.shape
        complete = dataset.complete_mask()
        if values is not None:
            values = np.asarray(values, dtype=float)
            complete = complete & ~np.isnan(values).any(axis=1)
        else:
            values = dataset.values
        if not complete.all():
            dropped = int((~complete).sum())
            if drop_rule == "error":
                raise DataValidationError(
                    f"{dropped} site-year(s) have missing days; fitting requires complete series"
                )
            logger.warning(f"Excluding {dropped} incomplete site-year(s) from the likelihood")
        self.active = complete
        self._mask = complete[:, None, :].astype(float)
        self.values = np.where(self._mask > 0, np.nan_to_num(values), 0.0)
        self.n_active = complete.sum(axis=0).astype(float)
        self.n_transitions = self.n_active * max(self.n_days - 1, 0)
        self.X = np.zeros_like(self.values)
        self._lag_stats: Optional[Tuple[np.ndarray, np.ndarray, np.ndarray]] = None

    def mean_surface(self, state: ModelState) -> np.ndarray:
        """mu[l, i] = beta1 sin_l + beta2 cos_l + beta3 elev_i."""
        fixed = state.fixed
        return (
            fixed.beta1 * self.design.sin[:, None]
            + fixed.beta2 * self.design.cos[:, None]
            + fixed.beta3 * self.design.elev[None, :]
        )

    def residuals(self, state: ModelState) -> np.ndarray:
        """X for ``state`` without touching the cache."""
        fitted = self.mean_surface(state)[None, :, :] + state.temporal.gamma[:, None, :]
        return (self.values - fitted) * self._mask

    def refresh(self, state: ModelState) -> None:
        self.X = self.residuals(state)
        self._lag_stats = None

    def shift(self, delta) -> None:
        """The fitted mean grew by ``delta`` (broadcast to [T x L x I])."""
        self.X -= np.asarray(delta, dtype=float) * self._mask
        self._lag_stats = None

    def filtered(self, rho: np.ndarray, X: Optional[np.ndarray] = None) -> np.ndarray:
        """AR-filtered residuals X_l - rho X_{l-1}, shape [T x (L-1) x I]."""
        X = self.X if X is None else X
        return X[:, 1:, :] - rho[None, None, :] * X[:, :-1, :]

    def lag_stats(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per-site sums of X_l^2, X_l X_{l-1} and X_{l-1}^2 over l >= 2."""
        if self._lag_stats is None:
            head, tail = self.X[:, 1:, :], self.X[:, :-1, :]
            self._lag_stats = (
                np.einsum("tli,tli->i", head, head),
                np.einsum("tli,tli->i", head, tail),
                np.einsum("tli,tli->i", tail, tail),
            )
        return self._lag_stats

    def sse(self, rho) -> np.ndarray:
        """Per-site sum of squared AR innovations for autocorrelation ``rho``."""
        s00, s01, s11 = self.lag_stats()
        rho = np.asarray(rho, dtype=float)
        return np.maximum(s00 - 2.0 * rho * s01 + rho ** 2 * s11, 0.0)

    def mask3(self) -> np.ndarray:
        return self._mask
