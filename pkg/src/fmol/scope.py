"""Oscilloscope feed: min/max decimation of track output runs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

SCOPE_POINTS = 256


@dataclass(frozen=True)
class ScopeFrame:
    """One track's waveform slice: 256 (min, max) spans, values in [-1, 1]."""

    track: int
    frame_index: int
    points: Tuple[Tuple[float, float], ...]


def scope_decimate(buffer: np.ndarray, points: int = SCOPE_POINTS) -> np.ndarray:
    """Decimate a run of frames into (points, 2) [min, max] spans.

    buffer is (n,) mono or (n, 2) stereo; stereo extrema are taken across
    both channels.  For n >= points the spans partition the run exactly; a
    short run pads by letting spans overlap single samples, so the global
    min/max is preserved either way.
    """
    buf = np.asarray(buffer)
    n = buf.shape[0]
    if n == 0:
        return np.zeros((points, 2))
    if buf.ndim == 1:
        mins = maxs = buf
    else:
        mins = buf.min(axis=1)
        maxs = buf.max(axis=1)
    out = np.empty((points, 2))
    if n >= points:
        bounds = (np.arange(points + 1) * n) // points
        for i in range(points):
            a, b = bounds[i], bounds[i + 1]
            out[i, 0] = mins[a:b].min()
            out[i, 1] = maxs[a:b].max()
    else:
        idx = (np.arange(points) * n) // points
        out[:, 0] = mins[idx]
        out[:, 1] = maxs[idx]
    return out


def frame_from_buffer(track: int, frame_index: int, buffer: np.ndarray) -> ScopeFrame:
    pts = scope_decimate(buffer)
    return ScopeFrame(track=track, frame_index=frame_index,
                      points=tuple((float(a), float(b)) for a, b in pts))
