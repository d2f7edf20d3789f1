"""Processor families: filters, combs, delays, reverbs, ring mod, shapers.

Every family's variation 0 is "bypass", a sample-exact identity, so any
slot in a chain can be neutralized without changing family.  Delay-based
units process blocks in spans no longer than their recursion delay, which
keeps feedback exact while staying vectorized.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.signal import lfilter

from ..dsp import ParamBlock, StereoRing
from ..mapping import ParamSpec
from . import Unit, UnitDescriptor, register

_TWO_PI = 2.0 * math.pi


def _mix(dry: np.ndarray, wet: np.ndarray, params: ParamBlock, k: int) -> np.ndarray:
    if params.is_ramp(k):
        m = params.array(k)[:, None]
    else:
        m = params.scalar(k)
        if m == 1.0:
            return wet
        if m == 0.0:
            return dry
    return dry + (wet - dry) * m


class BypassProc(Unit):
    """Identity. Returns its input object untouched."""

    def _render(self, inp, params):
        return inp


FILTER_PARAMS = (
    ParamSpec("cutoff", 20.0, 16000.0, "exp", freq_like=True),
    ParamSpec("resonance", 0.5, 10.0, "lin"),
    ParamSpec("mix", 0.0, 1.0, "lin"),
)
FILTER_DEFAULTS = (0.7, 0.1, 1.0)

_PEAK_GAIN = 10.0 ** (6.0 / 40.0)  # +6 dB peaking EQ amplitude


def _biquad_coeffs(mode: str, freq: float, q: float, sr: int):
    w = _TWO_PI * freq / sr
    w = min(max(w, 1e-4), 0.995 * math.pi)
    cw, sw = math.cos(w), math.sin(w)
    alpha = sw / (2.0 * q)
    if mode == "lp":
        b = np.array([(1 - cw) / 2, 1 - cw, (1 - cw) / 2])
        a = np.array([1 + alpha, -2 * cw, 1 - alpha])
    elif mode == "hp":
        b = np.array([(1 + cw) / 2, -(1 + cw), (1 + cw) / 2])
        a = np.array([1 + alpha, -2 * cw, 1 - alpha])
    elif mode == "bp":
        b = np.array([alpha, 0.0, -alpha])
        a = np.array([1 + alpha, -2 * cw, 1 - alpha])
    elif mode == "notch":
        b = np.array([1.0, -2 * cw, 1.0])
        a = np.array([1 + alpha, -2 * cw, 1 - alpha])
    elif mode == "peak":
        A = _PEAK_GAIN
        b = np.array([1 + alpha * A, -2 * cw, 1 - alpha * A])
        a = np.array([1 + alpha / A, -2 * cw, 1 - alpha / A])
    else:
        raise ValueError(mode)
    return b / a[0], a / a[0]


class FilterProc(Unit):
    """Biquad filter bank: 12 dB modes, 24 dB cascades, one-pole slopes."""

    def __init__(self, desc, sample_rate, rng):
        super().__init__(desc, sample_rate, rng)
        self.mode = desc.preset["mode"]
        self.stages = desc.preset["stages"]
        self._key = None
        self._ba = None
        self.zi = [np.zeros((2, 2)) for _ in range(self.stages)]
        self._onepole_zi = np.zeros((1, 2))

    def reset(self):
        self.zi = [np.zeros((2, 2)) for _ in range(self.stages)]
        self._onepole_zi = np.zeros((1, 2))

    def _render(self, inp, params):
        f = params.scalar(0)
        q = params.scalar(1)
        if self.mode in ("lp6", "hp6"):
            c = 1.0 - math.exp(-_TWO_PI * min(f, 0.45 * self.sample_rate)
                               / self.sample_rate)
            low, self._onepole_zi = lfilter(
                [c], [1.0, c - 1.0], inp, axis=0, zi=self._onepole_zi)
            wet = low if self.mode == "lp6" else inp - low
        else:
            key = (f, q)
            if key != self._key:
                self._key = key
                self._ba = _biquad_coeffs(self.mode, f, q, self.sample_rate)
            b, a = self._ba
            wet = inp
            for s in range(self.stages):
                wet, self.zi[s] = lfilter(b, a, wet, axis=0, zi=self.zi[s])
        return _mix(inp, wet, params, 2)


COMB_PARAMS = (
    ParamSpec("freq", 20.0, 2000.0, "exp", freq_like=True),
    ParamSpec("feedback", 0.0, 0.98, "lin"),
    ParamSpec("mix", 0.0, 1.0, "lin"),
)
COMB_DEFAULTS = (0.5, 0.7, 0.5)

_DECAY_FLOOR = 1e-4


class CombProc(Unit):
    """Tuned comb resonator; the freq param sets the loop delay sr/f."""

    def __init__(self, desc, sample_rate, rng):
        super().__init__(desc, sample_rate, rng)
        self.kind = desc.preset["kind"]  # "ff" | "fb"
        self.sign = desc.preset["sign"]
        self.fb_scale = desc.preset.get("fb_scale", 1.0)
        self.damp = desc.preset.get("damp", 0.0)
        cap = sample_rate // 10 + 64
        self.ring = StereoRing(cap)
        self._damp_zi = np.zeros((1, 2))

    def reset(self):
        self.ring.clear()
        self._damp_zi = np.zeros((1, 2))

    def _delay(self, freq: float) -> int:
        return max(2, min(int(round(self.sample_rate / max(freq, 20.0))),
                          self.ring.cap - 64))

    def decay_time_seconds(self, freq: float, feedback: float) -> float:
        """Analytic time for the impulse response to fall below 1e-4."""
        d = self._delay(freq) / self.sample_rate
        g = abs(feedback * self.fb_scale)
        if self.kind == "ff" or g < 1e-6:
            return 2.0 * d
        rounds = math.ceil(math.log(_DECAY_FLOOR) / math.log(g))
        return (rounds + 1) * d

    def _render(self, inp, params):
        n = inp.shape[0]
        D = self._delay(params.scalar(0))
        g = params.scalar(1) * self.fb_scale * self.sign
        if self.kind == "ff":
            self.ring.push(inp)
            delayed = self.ring.read_delayed(D + n, n)
            wet = (inp + g * delayed) / (1.0 + abs(g))
        else:
            wet = np.empty_like(inp)
            done = 0
            while done < n:
                m = min(D, n - done)
                fb = self.ring.read_delayed(D, m)
                if self.damp > 0.0:
                    c = 1.0 - self.damp
                    fb, self._damp_zi = lfilter([c], [1.0, c - 1.0], fb,
                                                axis=0, zi=self._damp_zi)
                v = inp[done:done + m] + g * fb
                self.ring.push(v)
                wet[done:done + m] = v
                done += m
        return _mix(inp, wet, params, 2)


DELAY_PARAMS = (
    ParamSpec("time", 0.02, 1.0, "exp"),
    ParamSpec("feedback", 0.0, 0.9, "lin"),
    ParamSpec("mix", 0.0, 1.0, "lin"),
)
DELAY_DEFAULTS = (0.5, 0.4, 0.35)


class DelayProc(Unit):
    """Multi-tap delay with feedback from the full-length tap.

    Taps are (fraction of time, left gain, right gain).
    """

    def __init__(self, desc, sample_rate, rng):
        super().__init__(desc, sample_rate, rng)
        self.taps = desc.preset["taps"]
        cap = sample_rate + 2 * 64 + 8
        self.ring = StereoRing(cap)

    def reset(self):
        self.ring.clear()

    def _render(self, inp, params):
        n = inp.shape[0]
        D = max(2, min(int(round(params.scalar(0) * self.sample_rate)),
                       self.ring.cap - 2 * n - 4))
        fb = params.scalar(1)
        wet = np.zeros_like(inp)
        done = 0
        while done < n:
            m = min(D, n - done)
            line = self.ring.read_delayed(D, m)
            v = inp[done:done + m] + fb * line
            self.ring.push(v)
            for frac, gl, gr in self.taps:
                dk = max(1, int(round(frac * D)))
                tap = self.ring.read_delayed(dk + m, m)
                wet[done:done + m, 0] += gl * tap[:, 0]
                wet[done:done + m, 1] += gr * tap[:, 1]
            done += m
        return _mix(inp, wet, params, 2)


REVERB_PARAMS = (
    ParamSpec("size", 0.5, 1.5, "lin"),
    ParamSpec("damping", 0.0, 1.0, "lin"),
    ParamSpec("mix", 0.0, 1.0, "lin"),
)
REVERB_DEFAULTS = (0.5, 0.5, 0.3)

_REVERB_COMBS = (1557, 1617, 1491, 1422)
_REVERB_ALLPASS = (225, 556)


class ReverbProc(Unit):
    """Parallel damped combs into serial allpasses (Schroeder topology)."""

    def __init__(self, desc, sample_rate, rng):
        super().__init__(desc, sample_rate, rng)
        self.scale = desc.preset["scale"]
        self.g = desc.preset.get("g", 0.84)
        self.damp_bias = desc.preset.get("damp_bias", 0.0)
        self.comb_base = desc.preset.get("combs", _REVERB_COMBS)
        cap = int(sample_rate * 0.2) + 256
        self.combs = [StereoRing(cap) for _ in self.comb_base]
        self.comb_zi = [np.zeros((1, 2)) for _ in self.comb_base]
        self.aps = [StereoRing(2048) for _ in _REVERB_ALLPASS]

    def reset(self):
        for r in self.combs + self.aps:
            r.clear()
        self.comb_zi = [np.zeros((1, 2)) for _ in self.comb_base]

    def _comb_delays(self, size: float):
        s = size * self.scale * self.sample_rate / 44100.0
        out = []
        for i, base in enumerate(self.comb_base):
            d = max(2, min(int(round(base * s)), self.combs[i].cap - 128))
            out.append(d)
        return out

    def _render(self, inp, params):
        n = inp.shape[0]
        delays = self._comb_delays(params.scalar(0))
        damp = min(0.95, max(0.0, 0.2 + 0.6 * params.scalar(1) + self.damp_bias))
        c = 1.0 - damp
        wet = np.zeros_like(inp)
        for i, (ring, D) in enumerate(zip(self.combs, delays)):
            done = 0
            while done < n:
                m = min(D, n - done)
                line = ring.read_delayed(D, m)
                filt, self.comb_zi[i] = lfilter([c], [1.0, c - 1.0], line,
                                                axis=0, zi=self.comb_zi[i])
                ring.push(inp[done:done + m] + self.g * filt)
                wet[done:done + m] += line
                done += m
        wet *= 0.35
        sr_scale = self.sample_rate / 44100.0
        for ring, base in zip(self.aps, _REVERB_ALLPASS):
            D = max(2, min(int(round(base * sr_scale)), ring.cap - 128))
            done = 0
            g = 0.5
            while done < n:
                m = min(D, n - done)
                vd = ring.read_delayed(D, m)
                v = wet[done:done + m] + g * vd
                ring.push(v)
                wet[done:done + m] = vd - g * v
                done += m
        return _mix(inp, wet, params, 2)


RINGMOD_PARAMS = (
    ParamSpec("freq", 20.0, 8000.0, "exp", freq_like=True),
    ParamSpec("mix", 0.0, 1.0, "lin"),
)
RINGMOD_DEFAULTS = (0.5, 0.5)


class RingModProc(Unit):
    """Multiplies the input by a sine carrier at ratio * freq param."""

    def __init__(self, desc, sample_rate, rng):
        super().__init__(desc, sample_rate, rng)
        self.ratio = desc.preset["ratio"]
        self.phase = 0.0

    def reset(self):
        self.phase = 0.0

    def _render(self, inp, params):
        n = inp.shape[0]
        f = params.scalar(0) * self.ratio
        d = f / self.sample_rate
        ph = (self.phase + d * np.arange(n)) % 1.0
        self.phase = (self.phase + d * n) % 1.0
        wet = inp * np.sin(_TWO_PI * ph)[:, None]
        return _mix(inp, wet, params, 1)


SHAPER_PARAMS = (
    ParamSpec("drive", 1.0, 20.0, "exp"),
    ParamSpec("mix", 0.0, 1.0, "lin"),
)
SHAPER_DEFAULTS = (0.3, 0.5)


class WaveshaperProc(Unit):
    """Memoryless nonlinearities; asym and rectify get a DC blocker."""

    def __init__(self, desc, sample_rate, rng):
        super().__init__(desc, sample_rate, rng)
        self.curve = desc.preset["curve"]
        self._dc_zi = np.zeros((1, 2))

    def reset(self):
        self._dc_zi = np.zeros((1, 2))

    def _render(self, inp, params):
        d = params.scalar(0)
        x = inp
        if self.curve == "soft":
            wet = np.tanh(d * x) / math.tanh(d)
        elif self.curve == "drive":
            wet = np.tanh(d * x)
        elif self.curve == "hard":
            wet = np.clip(d * x, -1.0, 1.0)
        elif self.curve == "fold":
            wet = np.sin(0.5 * math.pi * np.clip(d, 1.0, 8.0) * x)
        elif self.curve == "asym":
            # positive half driven harder; DC blocker strips the bias
            wet = np.tanh(d * x * np.where(x >= 0.0, 1.5, 0.75))
            wet, self._dc_zi = lfilter([1.0, -1.0], [1.0, -0.995], wet,
                                       axis=0, zi=self._dc_zi)
        elif self.curve == "rectify":
            wet = np.abs(x)
            wet, self._dc_zi = lfilter([1.0, -1.0], [1.0, -0.995], wet,
                                       axis=0, zi=self._dc_zi)
        else:  # crush
            levels = max(2.0, round(48.0 / d))
            wet = np.round(x * levels) / levels
        return _mix(inp, wet, params, 1)


BYPASS_PARAMS = (ParamSpec("amount", 0.0, 1.0, "lin"),)
BYPASS_DEFAULTS = (0.0,)

BYPASS_ID = 1000


def _proc(unit_id, name, algorithm, variation, cls, preset, params, defaults):
    register(UnitDescriptor(
        unit_id=unit_id, kind="processor", name=name, base_algorithm=algorithm,
        variation=variation, params=params, factory=cls,
        preset=preset, defaults=defaults))


def _family(base_id, algorithm, entries, params, defaults):
    """Register variation 0 as the family's bypass, then the real variants."""
    _proc(base_id, f"{algorithm} bypass", algorithm, 0, BypassProc, {},
          params, defaults)
    for i, (label, cls, preset) in enumerate(entries, start=1):
        _proc(base_id + i, label, algorithm, i, cls, preset, params, defaults)


_proc(BYPASS_ID, "bypass", "bypass", 0, BypassProc, {},
      BYPASS_PARAMS, BYPASS_DEFAULTS)

_family(1020, "filter", [
    ("filter lp6", FilterProc, {"mode": "lp6", "stages": 0}),
    ("filter hp6", FilterProc, {"mode": "hp6", "stages": 0}),
    ("filter lp12", FilterProc, {"mode": "lp", "stages": 1}),
    ("filter hp12", FilterProc, {"mode": "hp", "stages": 1}),
    ("filter bp12", FilterProc, {"mode": "bp", "stages": 1}),
    ("filter notch", FilterProc, {"mode": "notch", "stages": 1}),
    ("filter peak", FilterProc, {"mode": "peak", "stages": 1}),
    ("filter lp24", FilterProc, {"mode": "lp", "stages": 2}),
    ("filter hp24", FilterProc, {"mode": "hp", "stages": 2}),
    ("filter bp24", FilterProc, {"mode": "bp", "stages": 2}),
], FILTER_PARAMS, FILTER_DEFAULTS)

_family(1040, "comb", [
    ("comb resonator ff+", CombProc, {"kind": "ff", "sign": 1.0}),
    ("comb resonator ff-", CombProc, {"kind": "ff", "sign": -1.0}),
    ("comb resonator soft", CombProc, {"kind": "fb", "sign": 1.0, "fb_scale": 0.6}),
    ("comb resonator sharp", CombProc, {"kind": "fb", "sign": 1.0}),
    ("comb resonator neg", CombProc, {"kind": "fb", "sign": -1.0}),
    ("comb resonator damped", CombProc, {"kind": "fb", "sign": 1.0, "damp": 0.35}),
    ("comb resonator deep", CombProc, {"kind": "fb", "sign": 1.0, "fb_scale": 0.85,
                                       "damp": 0.15}),
    ("comb resonator tight", CombProc, {"kind": "fb", "sign": 1.0, "fb_scale": 0.4,
                                        "damp": 0.5}),
], COMB_PARAMS, COMB_DEFAULTS)

_family(1060, "delay", [
    ("delay slap", DelayProc, {"taps": ((1.0, 0.9, 0.9),)}),
    ("delay eighth", DelayProc, {"taps": ((0.5, 0.7, 0.7), (1.0, 0.5, 0.5))}),
    ("delay quarter", DelayProc, {"taps": ((1.0, 0.8, 0.8),)}),
    ("delay pingpong", DelayProc, {"taps": ((0.5, 0.8, 0.0), (1.0, 0.0, 0.8))}),
    ("delay multitap3", DelayProc, {"taps": ((0.33, 0.6, 0.6), (0.66, 0.45, 0.45),
                                             (1.0, 0.35, 0.35))}),
    ("delay multitap4", DelayProc, {"taps": ((0.25, 0.55, 0.55), (0.5, 0.45, 0.45),
                                             (0.75, 0.35, 0.35), (1.0, 0.3, 0.3))}),
    ("delay swing", DelayProc, {"taps": ((0.66, 0.6, 0.6), (1.0, 0.5, 0.5))}),
    ("delay sparse", DelayProc, {"taps": ((0.875, 0.5, 0.5), (1.0, 0.4, 0.4))}),
], DELAY_PARAMS, DELAY_DEFAULTS)

_family(1080, "reverb", [
    ("reverb small", ReverbProc, {"scale": 0.45}),
    ("reverb room", ReverbProc, {"scale": 0.6}),
    ("reverb chamber", ReverbProc, {"scale": 0.8}),
    ("reverb hall", ReverbProc, {"scale": 1.0}),
    ("reverb plate", ReverbProc, {"scale": 0.7, "combs": (1357, 1399, 1433, 1459),
                                  "g": 0.88}),
    ("reverb cathedral", ReverbProc, {"scale": 1.4, "g": 0.88}),
    ("reverb dark", ReverbProc, {"scale": 1.0, "damp_bias": 0.25}),
    ("reverb bright", ReverbProc, {"scale": 1.0, "damp_bias": -0.15}),
    ("reverb long", ReverbProc, {"scale": 1.2, "g": 0.9}),
], REVERB_PARAMS, REVERB_DEFAULTS)

_family(1100, "ringmod", [
    ("ringmod sub", RingModProc, {"ratio": 0.5}),
    ("ringmod unison", RingModProc, {"ratio": 1.0}),
    ("ringmod octave", RingModProc, {"ratio": 2.0}),
    ("ringmod fifth", RingModProc, {"ratio": 1.5}),
    ("ringmod twelfth", RingModProc, {"ratio": 3.0}),
    ("ringmod inharmonic", RingModProc, {"ratio": 2.41}),
    ("ringmod shimmer", RingModProc, {"ratio": 4.0}),
], RINGMOD_PARAMS, RINGMOD_DEFAULTS)

_family(1120, "waveshaper", [
    ("waveshaper soft", WaveshaperProc, {"curve": "soft"}),
    ("waveshaper drive", WaveshaperProc, {"curve": "drive"}),
    ("waveshaper hard", WaveshaperProc, {"curve": "hard"}),
    ("waveshaper fold", WaveshaperProc, {"curve": "fold"}),
    ("waveshaper asym", WaveshaperProc, {"curve": "asym"}),
    ("waveshaper rectify", WaveshaperProc, {"curve": "rectify"}),
    ("waveshaper crush", WaveshaperProc, {"curve": "crush"}),
], SHAPER_PARAMS, SHAPER_DEFAULTS)
