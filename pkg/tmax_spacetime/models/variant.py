# models/variant.py

import re
from enum import Enum
from typing import List

from pydantic import BaseModel, ConfigDict

from ..exceptions import ConfigurationError


class FieldName(str, Enum):
    """The four spatially varying fields; values are the variant-string tokens."""
    BETA0 = "beta0"
    ALPHA = "alpha"
    RHO = "rho"
    SIGMA = "sigma"


FIELD_ORDER = (FieldName.BETA0, FieldName.ALPHA, FieldName.RHO, FieldName.SIGMA)

_VARIANT_PATTERN = re.compile(r"^M(?P<count>[0-4])(?::(?P<fields>[a-z0-9_,\s]*))?$")


class ModelVariant(BaseModel):
    """Which site-level fields get a Gaussian process; a disabled field equals its global value."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    beta0: bool = True
    alpha: bool = True
    rho: bool = True
    sigma: bool = True
    pin_rho_psi_zero: bool = True

    def enabled(self, field: FieldName) -> bool:
        return bool(getattr(self, FieldName(field).value))

    @property
    def enabled_fields(self) -> List[FieldName]:
        return [f for f in FIELD_ORDER if self.enabled(f)]

    @property
    def n_processes(self) -> int:
        return len(self.enabled_fields)

    @property
    def code(self) -> str:
        """Canonical variant string, e.g. ``M0``, ``M4`` or ``M2:beta0,sigma``."""
        count = self.n_processes
        if count in (0, 4):
            return f"M{count}"
        return f"M{count}:" + ",".join(f.value for f in self.enabled_fields)

    @property
    def label(self) -> str:
        """Table label, e.g. ``M1(beta0)``."""
        count = self.n_processes
        if count in (0, 4):
            return f"M{count}"
        return f"M{count}(" + ",".join(f.value for f in self.enabled_fields) + ")"

    def __str__(self) -> str:
        return self.code

    @classmethod
    def parse(cls, text: str, pin_rho_psi_zero: bool = True) -> "ModelVariant":
        """Parse ``M0``, ``M4``, ``M1:beta0`` or ``M3:beta0,alpha,sigma``."""
        match = _VARIANT_PATTERN.match(str(text).strip())
        if not match:
            raise ConfigurationError(f"cannot parse model variant {text!r}")
        count = int(match.group("count"))
        tokens = [tok.strip() for tok in (match.group("fields") or "").split(",") if tok.strip()]
        known = {f.value for f in FieldName}
        unknown = [tok for tok in tokens if tok not in known]
        if unknown:
            raise ConfigurationError(f"unknown field(s) {unknown} in variant {text!r}; expected {sorted(known)}")
        if len(set(tokens)) != len(tokens):
            raise ConfigurationError(f"repeated field in variant {text!r}")
        if count == 4 and not tokens:
            tokens = list(known)
        if len(tokens) != count:
            raise ConfigurationError(f"variant {text!r} names {len(tokens)} field(s) but declares M{count}")
        return cls(**{f.value: f.value in tokens for f in FieldName}, pin_rho_psi_zero=pin_rho_psi_zero)


# The nine-variant comparison lattice, in reporting order.
STANDARD_LATTICE = [
    "M0",
    "M1:beta0",
    "M1:alpha",
    "M1:rho",
    "M1:sigma",
    "M2:beta0,sigma",
    "M3:beta0,alpha,sigma",
    "M3:alpha,rho,sigma",
    "M4",
]


def standard_lattice(pin_rho_psi_zero: bool = True) -> List[ModelVariant]:
    return [ModelVariant.parse(code, pin_rho_psi_zero=pin_rho_psi_zero) for code in STANDARD_LATTICE]
