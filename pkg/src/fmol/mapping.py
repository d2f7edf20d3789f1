"""Normalized [0,1] <-> physical parameter mapping curves."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


def clamp01(v: float) -> float:
    if v < 0.0:
        return 0.0
    if v > 1.0:
        return 1.0
    return v


@dataclass(frozen=True)
class ParamSpec:
    """One entry of a unit's parameter schema.

    curve "lin" maps [0,1] -> [lo, hi] linearly; "exp" maps log-uniformly
    (lo must be > 0).  freq_like marks parameters whose physical meaning is
    a frequency, used by gesture mapping and the monotonicity tests.
    """

    name: str
    lo: float
    hi: float
    curve: str = "lin"  # "lin" | "exp"
    freq_like: bool = False
    _log_ratio: float = field(init=False, repr=False, compare=False, default=0.0)

    def __post_init__(self):
        if self.curve not in ("lin", "exp"):
            raise ValueError(f"unknown curve {self.curve!r}")
        if self.curve == "exp" and self.lo <= 0:
            raise ValueError("exp curve requires lo > 0")
        if self.curve == "exp":
            object.__setattr__(self, "_log_ratio", math.log(self.hi / self.lo))

    def to_physical(self, v):
        """Map normalized value(s) to the physical range. Accepts scalars or arrays."""
        if self.curve == "lin":
            return self.lo + (self.hi - self.lo) * v
        if isinstance(v, np.ndarray):
            return self.lo * np.exp(self._log_ratio * v)
        return self.lo * math.exp(self._log_ratio * v)

    def to_normalized(self, x: float) -> float:
        """Inverse of to_physical, clamped into [0,1]."""
        if self.curve == "lin":
            if self.hi == self.lo:
                return 0.0
            return clamp01((x - self.lo) / (self.hi - self.lo))
        return clamp01(math.log(x / self.lo) / self._log_ratio)
