"""Shannon entropy of masses, densities, and utility increments.

Discrete entropy is -sum p_i log p_i with the convention 0 log 0 = 0;
differential entropy replaces the sum with a quadrature integral on the
support's grid.  Natural log is the default; base-2 is available because
nothing downstream depends on the unit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .core import Support, ValidationError

__all__ = [
    "EntropyValue",
    "discrete_entropy",
    "differential_entropy",
    "entropy_of_increments",
    "ZERO_MASS_FLOOR",
]

#: Masses below this are treated as exact zeros inside p log p.
ZERO_MASS_FLOOR = 1e-300

_BASES = ("natural", "base2")


@dataclass(frozen=True)
class EntropyValue:
    """An entropy together with the logarithm base it was taken in."""

    value: float
    base: str = "natural"

    def __post_init__(self) -> None:
        if self.base not in _BASES:
            raise ValidationError(f"entropy base must be one of {_BASES}")
        if not math.isfinite(self.value):
            raise ValidationError("entropy value must be finite")

    def in_base(self, base: str) -> "EntropyValue":
        if base == self.base:
            return self
        if base == "base2":
            return EntropyValue(self.value / math.log(2.0), "base2")
        return EntropyValue(self.value * math.log(2.0), "natural")


def _neg_xlogx(p: NDArray[np.float64]) -> NDArray[np.float64]:
    out = np.zeros_like(p)
    big = p > ZERO_MASS_FLOOR
    out[big] = -p[big] * np.log(p[big])
    return out


def _finish(value: float, base: str) -> EntropyValue:
    # Round-off can push a mathematically non-negative sum a hair below 0.
    if -1e-12 < value < 0.0:
        value = 0.0
    if base == "base2":
        value /= math.log(2.0)
    return EntropyValue(value, base)


def discrete_entropy(
    masses: Sequence[float] | NDArray[np.float64], base: str = "natural"
) -> EntropyValue:
    """Entropy -sum p log p of a probability mass vector.

    The masses must be non-negative and sum to 1 within 1e-9.  The sum is
    returned as computed (the input is not renormalized).
    """
    p = np.asarray(masses, dtype=np.float64)
    if p.ndim != 1 or len(p) == 0:
        raise ValidationError("masses must be a non-empty vector")
    if not np.all(np.isfinite(p)):
        raise ValidationError("masses must be finite")
    if np.any(p < 0.0):
        raise ValidationError("masses must be non-negative")
    total = float(p.sum())
    if abs(total - 1.0) > 1e-9:
        raise ValidationError(f"masses sum to {total!r}, not 1")
    return _finish(float(_neg_xlogx(p).sum()), base)


def differential_entropy(
    density: NDArray[np.float64], support: Support, base: str = "natural"
) -> EntropyValue:
    """Entropy -integral p log p of a density tabulated on a continuous grid."""
    if not support.is_continuous:
        raise ValidationError("differential entropy needs a continuous support")
    p = np.asarray(density, dtype=np.float64)
    if p.shape != (support.n,):
        raise ValidationError("support mismatch: expected one density value per node")
    if not np.all(np.isfinite(p)):
        raise ValidationError("density must be finite")
    if np.any(p < 0.0):
        raise ValidationError("density must be non-negative")
    mass = support.integrate(p)
    if abs(mass - 1.0) > 1e-8:
        raise ValidationError(f"density integrates to {mass!r}, not 1")
    return _finish(support.integrate(_neg_xlogx(p)), base)


def entropy_of_increments(increments, base: str = "natural") -> EntropyValue:
    """Entropy of a utility increment vector.

    Increments form a probability vector (non-negative, summing to 1), so
    their spread is measured exactly like a discrete distribution.  Accepts
    a UtilityIncrementVector or any plain sequence of increments.
    """
    arr = getattr(increments, "increments", increments)
    return discrete_entropy(np.asarray(arr, dtype=np.float64), base)
