"""Conformal parameters derived from the SLE parameter kappa.

Every formula downstream is driven by the weight h = h_{1,2} = (6-kappa)/(2*kappa),
the central charge c = (3*kappa-8)(6-kappa)/(2*kappa), and the ladder of boundary
weights h_{1,s} = (s-1)(2(s+1)-kappa)/(2*kappa).
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class KappaParams:
    """Immutable bundle of kappa and its derived conformal constants."""

    kappa: float
    h: float        # h_{1,2}
    c: float        # central charge
    h13: float      # h_{1,3} = (8-kappa)/kappa

    def as_dict(self):
        return {"kappa": self.kappa, "h": self.h, "c": self.c, "h13": self.h13}


def derive_params(kappa: float) -> KappaParams:
    """Compute (h, c, h13) for a given kappa > 0.

    Raises ValueError for non-positive or non-finite kappa.
    """
    kappa = float(kappa)
    if not math.isfinite(kappa) or kappa <= 0.0:
        raise ValueError(f"kappa must be a positive finite real, got {kappa}")
    h = (6.0 - kappa) / (2.0 * kappa)
    c = (3.0 * kappa - 8.0) * (6.0 - kappa) / (2.0 * kappa)
    h13 = (8.0 - kappa) / kappa
    return KappaParams(kappa=kappa, h=h, c=c, h13=h13)


def kac_weight(kappa: float, s: int) -> float:
    """Boundary Kac weight h_{1,s} = (s-1)(2(s+1)-kappa)/(2*kappa), s >= 1."""
    kappa = float(kappa)
    if not math.isfinite(kappa) or kappa <= 0.0:
        raise ValueError(f"kappa must be a positive finite real, got {kappa}")
    if int(s) != s or s < 1:
        raise ValueError(f"s must be a positive integer, got {s}")
    s = int(s)
    return (s - 1) * (2.0 * (s + 1) - kappa) / (2.0 * kappa)
