"""Convergence diagnostics, thinning protocol and trace export."""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .exceptions import InsufficientDrawsError
from .models.chain import SCALAR_NAMES, SITE_FIELD_NAMES, ChainOutput
from .models.reports import DiagnosticsReport
from .models.state import HyperState
from .models.variant import ModelVariant
from .sampler.tuner import FAMILIES

logger = logging.getLogger(__name__)

RHAT_DRAWS_PER_CHAIN = 1000
INFERENCE_DRAWS_PER_CHAIN = 100
RHAT_THRESHOLD = 1.2
ESS_TOLERANCE = 0.05
TRACE_COLUMNS = ["chain", "iter", "param", "value"]


def _as_chains(chains) -> np.ndarray:
    array = np.asarray(chains, dtype=float)
    if array.ndim == 1:
        array = array[None, :]
    if array.ndim != 2:
        raise ValueError("chains must be [M x n]")
    return array


def rhat(chains) -> float:
    """Classic potential scale reduction factor of M chains of length n.

    Returns inf when every chain is constant but the chains disagree, and 1
    when they are constant and equal.
    """
    chains = _as_chains(chains)
    m, n = chains.shape
    if m < 2 or n < 2:
        raise ValueError("R-hat needs at least two chains of two draws")
    means = chains.mean(axis=1)
    within = float(np.mean(np.var(chains, axis=1, ddof=1)))
    between = n * float(np.var(means, ddof=1))
    if within == 0.0:
        return float("inf") if np.ptp(means) > 0 else 1.0
    var_plus = (n - 1.0) / n * within + between / n
    return float(np.sqrt(var_plus / within))


def _autocovariance(x: np.ndarray) -> np.ndarray:
    """Biased autocovariance of one chain at every lag, via FFT."""
    n = len(x)
    centered = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    spectrum = np.fft.rfft(centered, n=size)
    acov = np.fft.irfft(spectrum * np.conj(spectrum), n=size)[:n]
    return acov / n


def ess(chains) -> float:
    """Multi-chain effective sample size with Geyer's initial monotone sequence.

    Capped at (1 + ESS_TOLERANCE) times the number of draws; a constant input gives 1.
    """
    chains = _as_chains(chains)
    m, n = chains.shape
    if n < 4:
        raise ValueError("ESS needs at least four draws per chain")
    total = m * n
    if np.ptp(chains) == 0:
        return 1.0
    acov = np.array([_autocovariance(c) for c in chains])
    chain_var = acov[:, 0] * n / (n - 1.0)
    within = float(chain_var.mean())
    var_plus = within * (n - 1.0) / n
    if m > 1:
        var_plus += float(np.var(chains.mean(axis=1), ddof=1))
    if not var_plus > 0:
        return 1.0
    rho = 1.0 - (within - acov.mean(axis=0)) / var_plus
    rho[0] = 1.0

    # sum adjacent pairs while positive, forcing them to be non-increasing
    pair_sums = []
    k = 0
    while k + 1 < n:
        pair = rho[k] + rho[k + 1]
        if pair < 0:
            break
        if pair_sums and pair > pair_sums[-1]:
            pair = pair_sums[-1]
        pair_sums.append(pair)
        k += 2
    tau = -1.0 + 2.0 * float(np.sum(pair_sums))
    tau = max(tau, 1.0 / np.log10(max(total, 10)))
    return float(min(total / tau, (1.0 + ESS_TOLERANCE) * total))


def thin_indices(available: int, target: int) -> np.ndarray:
    """Stride thinning: every ``available // target``-th draw, ending on a stride boundary."""
    if target < 1:
        raise ValueError("thinning target must be >= 1")
    if available < target:
        raise InsufficientDrawsError(f"only {available} retained draws", required=target)
    stride = available // target
    return stride - 1 + stride * np.arange(target)


def thin_protocol(
    output: ChainOutput,
    rhat_target: int = RHAT_DRAWS_PER_CHAIN,
    inference_target: int = INFERENCE_DRAWS_PER_CHAIN,
) -> Tuple[ChainOutput, ChainOutput]:
    """The long view used for R-hat and the short one used for ESS and inference."""
    long_view = output.select(thin_indices(output.n_draws, rhat_target))
    short_view = output.select(thin_indices(output.n_draws, inference_target))
    return long_view, short_view


def diagnose(
    chains: List[ChainOutput],
    rhat_target: Optional[int] = None,
    inference_target: Optional[int] = None,
    threshold: float = RHAT_THRESHOLD,
) -> DiagnosticsReport:
    """R-hat, ESS and acceptance over every sampled parameter.

    Targets default to the production protocol, reduced to what the shortest
    chain holds.
    """
    if not chains:
        raise ValueError("no chains to diagnose")
    available = min(chain.n_draws for chain in chains)
    rhat_target = rhat_target or min(RHAT_DRAWS_PER_CHAIN, available)
    inference_target = inference_target or min(INFERENCE_DRAWS_PER_CHAIN, available)
    views = [thin_protocol(chain, rhat_target, inference_target) for chain in chains]
    long_params = [view[0].sampled_parameters() for view in views]
    short_params = [view[1].sampled_parameters() for view in views]

    rhat_values: Dict[str, float] = {}
    ess_values: Dict[str, float] = {}
    for name in long_params[0]:
        if len(chains) > 1 and rhat_target >= 2:
            rhat_values[name] = rhat([p[name] for p in long_params])
        if inference_target >= 4:
            ess_values[name] = ess([p[name] for p in short_params])

    acceptance = {}
    for family in FAMILIES:
        rates = [c.acceptance.mean_rate(family) for c in chains]
        rates = [r for r in rates if np.isfinite(r)]
        if rates:
            acceptance[family] = float(np.mean(rates))

    report = DiagnosticsReport(
        rhat=rhat_values,
        ess=ess_values,
        acceptance=acceptance,
        n_chains=len(chains),
        rhat_draws_per_chain=rhat_target,
        ess_draws_per_chain=inference_target,
        rhat_threshold=threshold,
    )
    if rhat_values and not report.converged:
        logger.warning(f"R-hat >= {threshold} for {len(report.failing())} parameter(s), max {report.max_rhat:.3f}")
    return report


def trace_parameters(output: ChainOutput) -> Dict[str, np.ndarray]:
    """Every stored component by trace name, held ones included."""
    params: Dict[str, np.ndarray] = {name: output.scalars[name] for name in SCALAR_NAMES}
    for name in SITE_FIELD_NAMES:
        for i, site_id in enumerate(output.site_ids):
            params[f"{name}[{site_id}]"] = output.site_fields[name][:, i]
    for t in range(output.n_years):
        params[f"psi[{t + 1}]"] = output.psi[:, t]
    for t in range(output.n_years):
        for i, site_id in enumerate(output.site_ids):
            params[f"gamma[{t + 1},{site_id}]"] = output.gamma[:, t, i]
    return params


def trace_frame(chains: Sequence[ChainOutput]) -> pd.DataFrame:
    frames = []
    for chain in chains:
        params = trace_parameters(chain)
        n = chain.n_draws
        frames.append(pd.DataFrame({
            "chain": np.repeat(chain.chain_index, n * len(params)),
            "iter": np.tile(chain.draw_iterations, len(params)),
            "param": np.repeat(list(params), n),
            "value": np.concatenate(list(params.values())) if params and n else np.zeros(0),
        }))
    if not frames:
        return pd.DataFrame(columns=TRACE_COLUMNS)
    return pd.concat(frames, ignore_index=True)[TRACE_COLUMNS]


def export_trace(chains: Sequence[ChainOutput], path: Union[str, Path]) -> Path:
    """Write the long ``chain,iter,param,value`` trace CSV."""
    path = Path(path)
    frame = trace_frame(chains)
    frame.to_csv(path, index=False)
    logger.info(f"Wrote {len(frame)} trace rows for {len(chains)} chain(s) to {path}")
    return path


def read_trace(path: Union[str, Path]) -> pd.DataFrame:
    """Read a trace CSV written by ``export_trace`` without losing float precision."""
    frame = pd.read_csv(path, dtype={"param": str}, float_precision="round_trip")
    missing = [c for c in TRACE_COLUMNS if c not in frame.columns]
    if missing:
        raise ValueError(f"trace file {path} lacks column(s) {missing}")
    return frame


def equilibrium_covariance(
    hyper: HyperState,
    distance,
    t,
    h,
    variant: Optional[ModelVariant] = None,
    include_nugget: bool = True,
):
    """Stationary covariance of the site-year effects gamma_t(s) and gamma_{t+h}(s').

    ``t`` is the year on the fitting scale and ``distance`` is |s - s'| in km.
    Disabled intercept or slope fields contribute nothing.
    """
    variant = variant or ModelVariant()
    distance = np.asarray(distance, dtype=float)
    t = np.asarray(t, dtype=float)
    h = np.asarray(h)
    cov = np.zeros(np.broadcast(distance, t, h).shape)
    if variant.beta0:
        cov = cov + hyper.sigma2_beta0 * np.exp(-hyper.phi_beta0 * distance)
    if variant.alpha:
        cov = cov + t * (t + h) * hyper.sigma2_alpha * np.exp(-hyper.phi_alpha * distance)
    rho = hyper.rho_psi
    cov = cov + hyper.sigma2_lambda / (1.0 - rho ** 2) * np.power(rho, np.abs(h))
    if include_nugget:
        cov = cov + hyper.sigma2_eta * ((distance == 0) & (h == 0))
    return cov
