# sampler/tuner.py

import logging
from typing import Dict

import numpy as np

from ..models.chain import AcceptanceReport

logger = logging.getLogger(__name__)

FAMILIES = ("z_rho", "z_sig2")
TARGET_LOW = 0.20
TARGET_HIGH = 0.35
PROPOSAL_INFLATION = 3.5


class MhTuner:
    """Per-site random-walk proposal sds with windowed multiplicative adaptation.

    Every ``window`` iterations during burn-in each sd is multiplied by
    ``factor`` when its window acceptance exceeded TARGET_HIGH and divided by
    it when below TARGET_LOW. ``freeze`` stops adaptation and resets the
    counters so the report only covers the fixed kernel.
    """

    def __init__(self, initial_sd: Dict[str, np.ndarray], window: int = 100, factor: float = 1.1):
        self.sd = {family: np.array(initial_sd[family], dtype=float) for family in FAMILIES}
        for family, sd in self.sd.items():
            if np.any(sd <= 0) or not np.all(np.isfinite(sd)):
                raise ValueError(f"proposal sds for {family} must be finite and > 0")
        self.window = window
        self.factor = factor
        self.adapting = True
        size = {family: len(sd) for family, sd in self.sd.items()}
        self._window_accepts = {f: np.zeros(n) for f, n in size.items()}
        self._window_proposals = {f: np.zeros(n) for f, n in size.items()}
        self._accepts = {f: np.zeros(n) for f, n in size.items()}
        self._proposals = {f: np.zeros(n) for f, n in size.items()}

    def proposal_sd(self, family: str, slot: int) -> float:
        return float(self.sd[family][slot])

    def record(self, family: str, slot: int, accepted: bool) -> None:
        self._window_proposals[family][slot] += 1
        self._proposals[family][slot] += 1
        if accepted:
            self._window_accepts[family][slot] += 1
            self._accepts[family][slot] += 1

    def end_iteration(self, iteration: int) -> None:
        """Adapt at the end of each complete window while adapting."""
        if not self.adapting or iteration % self.window != 0:
            return
        for family in FAMILIES:
            proposals = self._window_proposals[family]
            seen = proposals > 0
            rate = np.divide(self._window_accepts[family], proposals, out=np.zeros_like(proposals), where=seen)
            self.sd[family][seen & (rate > TARGET_HIGH)] *= self.factor
            self.sd[family][seen & (rate < TARGET_LOW)] /= self.factor
            self._window_accepts[family][:] = 0
            self._window_proposals[family][:] = 0

    def freeze(self) -> None:
        self.adapting = False
        for family in FAMILIES:
            self._accepts[family][:] = 0
            self._proposals[family][:] = 0
        logger.debug("Proposal adaptation frozen")

    def rates(self, family: str) -> np.ndarray:
        proposals = self._proposals[family]
        return np.divide(self._accepts[family], proposals, out=np.full_like(proposals, np.nan),
                         where=proposals > 0)

    def report(self) -> AcceptanceReport:
        proposals = int(max(self._proposals[f].max(initial=0) for f in FAMILIES))
        return AcceptanceReport(
            proposals=proposals,
            rates={f: [float(r) for r in self.rates(f)] for f in FAMILIES if self._proposals[f].any()},
            proposal_sd={f: [float(s) for s in self.sd[f]] for f in FAMILIES},
        )


def initial_proposal_sd(n_transitions: np.ndarray, rho: np.ndarray) -> Dict[str, np.ndarray]:
    """Inflated large-sample posterior sds of the site latents given n AR transitions per site."""
    n = np.maximum(np.asarray(n_transitions, dtype=float), 1.0)
    rho = np.clip(np.asarray(rho, dtype=float), -0.99, 0.99)
    return {
        "z_rho": PROPOSAL_INFLATION * 2.0 / np.sqrt(n * (1.0 - rho ** 2)),
        "z_sig2": PROPOSAL_INFLATION * np.sqrt(2.0 / n),
    }
