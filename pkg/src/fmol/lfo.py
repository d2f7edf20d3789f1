"""Low-frequency oscillator shapes and per-block evaluation state.

Five shapes; all values in [-1, 1]; phase lives in [0, 1).  The "random"
shape holds one value per period and redraws from a seeded generator at
each period boundary, so rendering stays deterministic.
"""

from __future__ import annotations

import math

import numpy as np

SHAPES = ("sine", "square", "triangle", "saw", "random")

LFO_RATE_MAX_HZ = 20.0

_TWO_PI = 2.0 * math.pi


def lfo_value(shape: str, phase: float, random_held: float = 0.0) -> float:
    """Evaluate one LFO shape at a phase in [0, 1).

    For "random" the caller supplies the currently held value (see LfoState);
    the other four shapes are pure functions of phase.
    """
    if shape == "sine":
        return math.sin(_TWO_PI * phase)
    if shape == "square":
        return 1.0 if phase < 0.5 else -1.0
    if shape == "triangle":
        return 1.0 - 4.0 * abs(phase - 0.5)
    if shape == "saw":
        return 2.0 * phase - 1.0
    if shape == "random":
        return random_held
    raise ValueError(f"unknown LFO shape {shape!r}")


class LfoState:
    """Runtime state of one LFO slot.

    The rate is stored normalized (Hz / 20) so that live updates and
    snapshot round-trips are exact; Hz is derived transiently.  target is a
    parameter index of the owning unit, or -1 for off.
    """

    __slots__ = ("rate_norm", "depth", "shape", "target", "phase", "held", "_rng")

    def __init__(self, rate_hz: float, depth: float, shape: str, target: int,
                 rng: np.random.Generator):
        self.rate_norm = rate_hz / LFO_RATE_MAX_HZ
        self.depth = depth
        self.shape = shape
        self.target = target
        self.phase = 0.0
        self._rng = rng
        self.held = float(rng.uniform(-1.0, 1.0))

    @property
    def rate_hz(self) -> float:
        return self.rate_norm * LFO_RATE_MAX_HZ

    def value(self) -> float:
        return lfo_value(self.shape, self.phase, self.held)

    def advance(self, frames: int, sample_rate: int) -> None:
        """Advance the phase by a block, redrawing the held random value on wrap."""
        step = frames * self.rate_hz / sample_rate
        new_phase = self.phase + step
        wraps = int(new_phase)
        if wraps:
            for _ in range(wraps):
                self.held = float(self._rng.uniform(-1.0, 1.0))
            new_phase -= wraps
        self.phase = new_phase
