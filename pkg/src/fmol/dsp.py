"""Shared block-DSP plumbing: resolved parameter views, rings, pan law.

All audio paths work on float64 (block, 2) arrays internally; the engine
converts to float32 at the master output.  Units must never write into
their input buffers.
"""

from __future__ import annotations

from typing import Union

import numpy as np

try:  # the public lfilter wrapper costs more than the filtering at block size
    from scipy.signal import _sigtools

    def fast_lfilter(b, a, x, zi):
        """lfilter with state, skipping the wrapper's per-call validation.

        b, a, x, zi must already be float64 ndarrays of matching layout.
        """
        return _sigtools._linear_filter(b, a, x, 0, zi)
except ImportError:  # pragma: no cover
    from scipy.signal import lfilter as _lfilter

    def fast_lfilter(b, a, x, zi):
        return _lfilter(b, a, x, axis=0, zi=zi)

Normalized = Union[float, np.ndarray]

_ARANGE_CACHE: dict = {}


def arange_f64(n: int) -> np.ndarray:
    """Cached float64 [0, 1, ..., n-1]; treat as read-only."""
    a = _ARANGE_CACHE.get(n)
    if a is None:
        a = np.arange(n, dtype=np.float64)
        a.setflags(write=False)
        _ARANGE_CACHE[n] = a
    return a


_RAMP_CACHE: dict = {}


def ramp_fractions(n: int) -> np.ndarray:
    """Cached [1/n, 2/n, ..., 1.0]: the per-sample progress of a one-block ramp."""
    r = _RAMP_CACHE.get(n)
    if r is None:
        r = (np.arange(n, dtype=np.float64) + 1.0) / n
        r.setflags(write=False)
        _RAMP_CACHE[n] = r
    return r


class ParamBlock:
    """Physical parameter values of one unit for one block.

    Wraps normalized values (scalar float, or a per-sample float64 ramp)
    and maps them through the unit's schema lazily.  scalar(k) is the
    block-end physical value; array(k) a full per-sample vector.
    """

    __slots__ = ("desc", "_norm", "_n", "_cache")

    def __init__(self, desc, norm_values, block_size: int):
        self.desc = desc
        self._norm = norm_values
        self._n = block_size
        self._cache = {}

    @property
    def n(self) -> int:
        return self._n

    def is_ramp(self, k: int) -> bool:
        return isinstance(self._norm[k], np.ndarray)

    def norm_scalar(self, k: int) -> float:
        v = self._norm[k]
        return float(v[-1]) if isinstance(v, np.ndarray) else v

    def scalar(self, k: int) -> float:
        key = ("s", k)
        out = self._cache.get(key)
        if out is None:
            out = float(self.desc.params[k].to_physical(self.norm_scalar(k)))
            self._cache[key] = out
        return out

    def array(self, k: int) -> np.ndarray:
        key = ("a", k)
        out = self._cache.get(key)
        if out is None:
            v = self._norm[k]
            if isinstance(v, np.ndarray):
                out = self.desc.params[k].to_physical(v)
            else:
                out = np.full(self._n, self.scalar(k))
            self._cache[key] = out
        return out


def constant_params(desc, norm_values, block_size: int) -> ParamBlock:
    """ParamBlock with all-scalar normalized values (test and tooling helper)."""
    return ParamBlock(desc, list(norm_values), block_size)


def pan_gains(pan: Normalized):
    """Center-unity pan law: both channels at gain 1 when pan = 0.5.

    Panning off-center only attenuates the far side, so a centered
    generator keeps its exact sample levels.
    """
    if isinstance(pan, np.ndarray):
        gl = np.minimum(1.0, 2.0 * (1.0 - pan))
        gr = np.minimum(1.0, 2.0 * pan)
    else:
        gl = min(1.0, 2.0 * (1.0 - pan))
        gr = min(1.0, 2.0 * pan)
    return gl, gr


def pan_stereo(mono: np.ndarray, pan: Normalized) -> np.ndarray:
    """Spread a mono block into (n, 2) with the pan law above."""
    out = np.empty((mono.shape[0], 2))
    gl, gr = pan_gains(pan)
    np.multiply(mono, gl, out=out[:, 0])
    np.multiply(mono, gr, out=out[:, 1])
    return out


class StereoRing:
    """Circular stereo buffer for delay-based units.

    Reads always lag the write head; read_delayed(d, n) is only valid for
    n <= d (callers split their blocks into spans of at most the delay
    length, which keeps feedback recursions correct and vectorized).
    """

    def __init__(self, capacity: int):
        self.cap = int(capacity)
        self.buf = np.zeros((self.cap, 2))
        self.wp = 0

    def clear(self) -> None:
        self.buf[:] = 0.0
        self.wp = 0

    def read_delayed(self, delay: int, n: int) -> np.ndarray:
        start = (self.wp - delay) % self.cap
        end = start + n
        if end <= self.cap:
            return self.buf[start:end]
        out = np.empty((n, 2))
        first = self.cap - start
        out[:first] = self.buf[start:]
        out[first:] = self.buf[:end - self.cap]
        return out

    def push(self, x: np.ndarray) -> None:
        n = x.shape[0]
        end = self.wp + n
        if end <= self.cap:
            self.buf[self.wp:end] = x
        else:
            first = self.cap - self.wp
            self.buf[self.wp:] = x[:first]
            self.buf[:end - self.cap] = x[first:]
        self.wp = end % self.cap
