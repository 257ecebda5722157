from typing import Any, Dict, Tuple

import numpy as np


def clean_params(params: Dict[str, Any]) -> Dict[str, Any]:
    """Drop None values and empty lists from a parameter mapping."""
    cleaned = {}
    for key, value in params.items():
        if value is None:
            continue
        if isinstance(value, (list, tuple)) and not value:
            continue
        cleaned[key] = value
    return cleaned


def validate_identifier(identifier: str, name: str = "identifier") -> str:
    """Validate a site identifier."""
    if identifier is None:
        raise ValueError(f"{name} must not be None")
    identifier = str(identifier).strip()
    if not identifier:
        raise ValueError(f"{name} must be a non-empty string")
    if "," in identifier or "[" in identifier or "]" in identifier:
        raise ValueError(f"{name} {identifier!r} must not contain ',', '[' or ']'")
    return identifier


def derive_seed(base_seed: int, index: int) -> int:
    """Seed for chain or fold ``index`` derived from the run seed."""
    return int(base_seed) ^ int(index)


def z_to_rho(z: Any) -> Any:
    """(e^z - 1) / (e^z + 1), evaluated stably."""
    return np.tanh(np.asarray(z, dtype=float) / 2.0)


def rho_to_z(rho: Any) -> Any:
    """Inverse of z_to_rho."""
    rho = np.asarray(rho, dtype=float)
    return np.log1p(rho) - np.log1p(-rho)


def z_to_variance(z: Any) -> Any:
    return np.exp(np.asarray(z, dtype=float))


def interval(samples: np.ndarray, level: float = 0.90, axis: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """Equal-tailed empirical interval; 0.90 gives the 5th and 95th percentiles."""
    tail = 100.0 * (1.0 - level) / 2.0
    lower = np.percentile(samples, tail, axis=axis)
    upper = np.percentile(samples, 100.0 - tail, axis=axis)
    return lower, upper


def parse_window(text: str) -> Tuple[int, int]:
    """Parse ``"1956-1985"`` or ``"3:12"`` into an inclusive (start, end) pair."""
    for sep in ("-", ":"):
        if sep in text.strip()[1:]:
            head, tail = text.strip().rsplit(sep, 1)
            start, end = int(head), int(tail)
            break
    else:
        start = end = int(text)
    if end < start:
        raise ValueError(f"window {text!r} ends before it starts")
    return start, end
