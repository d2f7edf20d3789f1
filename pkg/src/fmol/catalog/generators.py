"""Generator families: oscillators, noise colors, sample playback, FM, plucks.

All generators share one parameter layout (freq, level, decay, timbre, pan;
pan reserved as the last index) and a two-stage attack/release envelope
excited by trigger events.  A unit that has never been triggered outputs
exact zeros.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.signal import lfilter

from ..dsp import ParamBlock, arange_f64, pan_stereo
from ..mapping import ParamSpec
from . import Unit, UnitDescriptor, register

FREQ_PARAM = 0
LEVEL_PARAM = 1
DECAY_PARAM = 2
TIMBRE_PARAM = 3
PAN_PARAM = 4

GENERATOR_PARAMS = (
    ParamSpec("freq", 20.0, 8000.0, "exp", freq_like=True),
    ParamSpec("level", 0.0, 1.0, "lin"),
    ParamSpec("decay", 0.05, 30.0, "exp"),
    ParamSpec("timbre", 0.0, 1.0, "lin"),
    ParamSpec("pan", 0.0, 1.0, "lin"),
)

GENERATOR_DEFAULTS = (0.5, 0.7, 1.0, 0.5, 0.5)

_SILENCE_FLOOR = 1e-6
_DECAY_TARGET = 1e-4  # envelope reaches this after the configured decay time


class _Envelope:
    """Attack ramp to exactly 1.0, then exponential release.

    A decay parameter at exactly 1.0 holds the envelope at its peak
    (infinite release), so steady-state levels stay sample-exact.
    """

    IDLE, ATTACK, RELEASE = 0, 1, 2
    ATTACK_FRAMES = 128

    __slots__ = ("stage", "value")

    def __init__(self):
        self.stage = self.IDLE
        self.value = 0.0

    def reset(self):
        self.stage = self.IDLE
        self.value = 0.0

    def trigger(self):
        self.stage = self.ATTACK

    def block(self, decay_norm: float, decay_seconds: float, n: int, sr: int):
        """Envelope for one block: None when idle, scalar when flat, else array."""
        if self.stage == self.IDLE:
            return None
        if self.stage == self.ATTACK:
            step = 1.0 / self.ATTACK_FRAMES
            env = np.minimum(1.0, self.value + step * (arange_f64(n) + 1.0))
            self.value = float(env[-1])
            if self.value >= 1.0:
                self.stage = self.RELEASE
            return env
        # release
        if decay_norm == 1.0:
            return self.value
        r = _DECAY_TARGET ** (1.0 / (decay_seconds * sr))
        env = self.value * np.power(r, arange_f64(n) + 1.0)
        self.value = float(env[-1])
        if self.value < _SILENCE_FLOOR:
            self.stage = self.IDLE
            self.value = 0.0
        return env


class _Phase:
    """Per-sample phase accumulator in [0, 1)."""

    __slots__ = ("value",)

    def __init__(self, start: float = 0.0):
        self.value = start

    def block(self, freq, n: int, sr: int) -> np.ndarray:
        if isinstance(freq, np.ndarray):
            d = freq / sr
            cum = np.cumsum(d)
            ph = (self.value + cum - d) % 1.0
            self.value = (self.value + float(cum[-1])) % 1.0
        else:
            d = freq / sr
            ph = (self.value + d * arange_f64(n)) % 1.0
            self.value = (self.value + d * n) % 1.0
        return ph


class GeneratorUnit(Unit):
    """Shared envelope / level / pan scaffolding around a mono _synth core."""

    def __init__(self, desc, sample_rate, rng):
        super().__init__(desc, sample_rate, rng)
        self.env = _Envelope()

    def reset(self):
        self.env.reset()
        self._reset_core()

    def trigger(self):
        self.env.trigger()
        self._on_trigger()

    def _reset_core(self):
        pass

    def _on_trigger(self):
        pass

    def _freq(self, params: ParamBlock):
        if params.is_ramp(FREQ_PARAM):
            return params.array(FREQ_PARAM)
        return params.scalar(FREQ_PARAM)

    def _render(self, inp, params: ParamBlock) -> np.ndarray:
        n = params.n
        env = self.env.block(params.norm_scalar(DECAY_PARAM),
                             params.scalar(DECAY_PARAM), n, self.sample_rate)
        if env is None:
            return np.zeros((n, 2))
        y = self._synth(params, n)
        level = params.array(LEVEL_PARAM) if params.is_ramp(LEVEL_PARAM) \
            else params.scalar(LEVEL_PARAM)
        y = y * (level * env)
        pan = params.array(PAN_PARAM) if params.is_ramp(PAN_PARAM) \
            else params.scalar(PAN_PARAM)
        return pan_stereo(y, pan)

    def _synth(self, params: ParamBlock, n: int) -> np.ndarray:
        raise NotImplementedError


_TWO_PI = 2.0 * math.pi


class SineGen(GeneratorUnit):
    """Sum of a few sine partials at fixed multiples of the base frequency."""

    def __init__(self, desc, sample_rate, rng):
        super().__init__(desc, sample_rate, rng)
        self.partials = desc.preset["partials"]  # ((mult, amp), ...)
        self.phases = [_Phase() for _ in self.partials]
        self.scale = 1.0 / sum(a for _, a in self.partials)

    def _reset_core(self):
        for p in self.phases:
            p.value = 0.0

    _on_trigger = _reset_core

    def _synth(self, params, n):
        f = self._freq(params)
        y = np.zeros(n)
        for (mult, amp), ph in zip(self.partials, self.phases):
            y += amp * np.sin(_TWO_PI * ph.block(f * mult, n, self.sample_rate))
        y *= self.scale
        return y


def _polyblep(t: np.ndarray, dt) -> np.ndarray:
    """Two-sample polynomial band-limited step correction around phase 0."""
    out = np.zeros_like(t)
    dt = np.maximum(dt, 1e-9)
    lo = t < dt
    if np.any(lo):
        tt = t[lo] / (dt[lo] if isinstance(dt, np.ndarray) else dt)
        out[lo] = tt + tt - tt * tt - 1.0
    hi = t > 1.0 - dt
    if np.any(hi):
        tt = (t[hi] - 1.0) / (dt[hi] if isinstance(dt, np.ndarray) else dt)
        out[hi] = tt * tt + tt + tt + 1.0
    return out


class SquareGen(GeneratorUnit):
    """Square / pulse; the plain variation keeps exact +-1 levels."""

    def __init__(self, desc, sample_rate, rng):
        super().__init__(desc, sample_rate, rng)
        self.blep = desc.preset["blep"]
        self.width = desc.preset["width"]
        self.phase = _Phase()

    def _reset_core(self):
        self.phase.value = 0.0

    _on_trigger = _reset_core

    def _synth(self, params, n):
        f = self._freq(params)
        ph = self.phase.block(f, n, self.sample_rate)
        w = self.width
        y = np.where(ph < w, 1.0, -1.0)
        if self.blep:
            dt = f / self.sample_rate
            y = y + _polyblep(ph, dt) - _polyblep((ph - w) % 1.0, dt)
            if w != 0.5:
                y = y - (2.0 * w - 1.0)  # remove pulse DC
        return y


class SawGen(GeneratorUnit):
    """Sawtooth: naive, polyblep, or a detuned stack ("supersaw")."""

    def __init__(self, desc, sample_rate, rng):
        super().__init__(desc, sample_rate, rng)
        self.blep = desc.preset["blep"]
        self.detunes = desc.preset["detunes"]  # cents offsets per voice
        spread = [i / len(self.detunes) for i in range(len(self.detunes))]
        self.start = spread
        self.phases = [_Phase(s) for s in spread]

    def _reset_core(self):
        for p, s in zip(self.phases, self.start):
            p.value = s

    _on_trigger = _reset_core

    def _synth(self, params, n):
        f = self._freq(params)
        y = np.zeros(n)
        for cents, phase in zip(self.detunes, self.phases):
            fv = f * (2.0 ** (cents / 1200.0))
            ph = phase.block(fv, n, self.sample_rate)
            v = 2.0 * ph - 1.0
            if self.blep:
                v = v - _polyblep(ph, fv / self.sample_rate)
            y += v
        y /= len(self.detunes)
        return y


class TriangleGen(GeneratorUnit):
    """Triangle with optional sine foldback controlled by the timbre param."""

    def __init__(self, desc, sample_rate, rng):
        super().__init__(desc, sample_rate, rng)
        self.fold = desc.preset["fold"]
        self.phase = _Phase()

    def _reset_core(self):
        self.phase.value = 0.0

    _on_trigger = _reset_core

    def _synth(self, params, n):
        f = self._freq(params)
        ph = self.phase.block(f, n, self.sample_rate)
        y = 1.0 - 4.0 * np.abs(((ph + 0.25) % 1.0) - 0.5)
        if self.fold > 1.0:
            t = params.scalar(TIMBRE_PARAM)
            k = 1.0 + (self.fold - 1.0) * t
            y = np.sin(0.5 * math.pi * k * y)
        return y


# third-order IIR approximation of a -3 dB/oct pink spectrum
_PINK_B = np.array([0.049922035, -0.095993537, 0.050612699, -0.004408786])
_PINK_A = np.array([1.0, -2.494956002, 2.017265875, -0.522189400])


class NoiseGen(GeneratorUnit):
    """Noise colors behind a one-pole lowpass driven by the freq param."""

    def __init__(self, desc, sample_rate, rng):
        super().__init__(desc, sample_rate, rng)
        self.color = desc.preset["color"]
        self._color_zi = None
        self._lp_zi = np.zeros(1)

    def _reset_core(self):
        self._color_zi = None
        self._lp_zi = np.zeros(1)

    def _synth(self, params, n):
        w = self.rng.uniform(-1.0, 1.0, n)
        if self.color == "white":
            y = w
        elif self.color == "pink":
            if self._color_zi is None:
                self._color_zi = np.zeros(3)
            y, self._color_zi = lfilter(_PINK_B, _PINK_A, w, zi=self._color_zi)
            y = y * 3.0
        elif self.color == "brown":
            if self._color_zi is None:
                self._color_zi = np.zeros(1)
            y, self._color_zi = lfilter([0.015], [1.0, -0.995], w, zi=self._color_zi)
            y = y * 2.0
        elif self.color == "blue":
            if self._color_zi is None:
                self._color_zi = np.zeros(1)
            y, self._color_zi = lfilter([0.5, -0.5], [1.0], w, zi=self._color_zi)
        else:  # crackle
            p = 0.002 + 0.05 * params.scalar(TIMBRE_PARAM)
            y = np.where(self.rng.random(n) < p, w, 0.0)
        c = 1.0 - math.exp(-_TWO_PI * params.scalar(FREQ_PARAM) / self.sample_rate)
        y, self._lp_zi = lfilter([c], [1.0, c - 1.0], y, zi=self._lp_zi)
        return y


_TONE_SR = 44100
_TONE_HZ = 400.0


def default_tone() -> np.ndarray:
    """Bundled test tone: a decaying harmonic pluck, generated in code."""
    t = np.arange(int(0.5 * _TONE_SR)) / _TONE_SR
    y = np.zeros_like(t)
    for mult, amp, damp in ((1, 1.0, 3.0), (2, 0.5, 5.0), (3, 0.33, 7.0), (5, 0.2, 9.0)):
        y += amp * np.exp(-damp * t) * np.sin(_TWO_PI * _TONE_HZ * mult * t)
    return 0.9 * y / np.max(np.abs(y))


class SamplePlayer(GeneratorUnit):
    """Plays a mono tone buffer: looped, one-shot, or reversed.

    The freq param repitches playback around the tone's reference pitch.
    set_tone swaps in external material (16-bit mono WAV via fmol.wavio).
    """

    def __init__(self, desc, sample_rate, rng):
        super().__init__(desc, sample_rate, rng)
        self.mode = desc.preset["mode"]
        self.tone = default_tone()
        self.tone_sr = _TONE_SR
        self.tone_hz = _TONE_HZ
        self.pos = 0.0 if self.mode != "reverse" else float(len(self.tone) - 1)

    def set_tone(self, tone: np.ndarray, tone_sr: int, tone_hz: float = _TONE_HZ):
        self.tone = np.asarray(tone, dtype=np.float64)
        self.tone_sr = tone_sr
        self.tone_hz = tone_hz
        self._on_trigger()

    def _reset_core(self):
        self.pos = 0.0 if self.mode != "reverse" else float(len(self.tone) - 1)

    _on_trigger = _reset_core

    def _synth(self, params, n):
        f = self._freq(params)
        rate = (f / self.tone_hz) * (self.tone_sr / self.sample_rate)
        if self.mode == "reverse":
            rate = -rate
        if isinstance(rate, np.ndarray):
            cum = np.cumsum(rate)
            pos = self.pos + cum - rate
            self.pos = self.pos + float(cum[-1])
        else:
            pos = self.pos + rate * arange_f64(n)
            self.pos = self.pos + rate * n
        L = len(self.tone)
        if self.mode == "once":
            valid = pos < L - 1
            pos = np.clip(pos, 0.0, L - 1.001)
        else:
            pos = pos % L
            self.pos %= L
        i0 = pos.astype(np.int64)
        frac = pos - i0
        y = self.tone[i0] * (1.0 - frac) + self.tone[(i0 + 1) % L] * frac
        if self.mode == "once":
            y = np.where(valid, y, 0.0)
        return y


class FmGen(GeneratorUnit):
    """Two-operator phase modulation at a fixed modulator ratio."""

    def __init__(self, desc, sample_rate, rng):
        super().__init__(desc, sample_rate, rng)
        self.ratio = desc.preset["ratio"]
        self.index = desc.preset["index"]
        self.car = _Phase()
        self.mod = _Phase()

    def _reset_core(self):
        self.car.value = 0.0
        self.mod.value = 0.0

    _on_trigger = _reset_core

    def _synth(self, params, n):
        f = self._freq(params)
        idx = self.index * 2.0 * params.scalar(TIMBRE_PARAM)
        cph = self.car.block(f, n, self.sample_rate)
        mph = self.mod.block(f * self.ratio, n, self.sample_rate)
        return np.sin(_TWO_PI * cph + idx * np.sin(_TWO_PI * mph))


class PluckGen(GeneratorUnit):
    """Plucked string: noise burst into an averaged feedback delay line.

    The delay length is captured from the freq param at each trigger, so
    pitch changes take effect on the next pluck.
    """

    def __init__(self, desc, sample_rate, rng):
        super().__init__(desc, sample_rate, rng)
        self.gain = desc.preset["gain"]
        self.blend = desc.preset["blend"]
        self.buf = np.zeros(2)
        self.length = 2
        self.rp = 0
        self.live = False
        self._pending_excite = False

    def _reset_core(self):
        self.buf[:] = 0.0
        self.rp = 0
        self.live = False
        self._pending_excite = False

    def _on_trigger(self):
        self._pending_excite = True

    def _excite(self, freq: float):
        N = int(round(self.sample_rate / max(freq, 20.0)))
        N = max(2, min(N, self.sample_rate // 20))
        burst = self.rng.uniform(-1.0, 1.0, N)
        burst -= burst.mean()
        self.buf = burst
        self.length = N
        self.rp = 0
        self.live = True

    def _synth(self, params, n):
        if self._pending_excite:
            self._pending_excite = False
            self._excite(params.scalar(FREQ_PARAM))
        if not self.live:
            return np.zeros(n)
        t = params.scalar(TIMBRE_PARAM)
        b = min(0.95, max(0.05, self.blend + (t - 0.5) * 0.3))
        g = self.gain
        out = np.empty(n)
        done = 0
        N = self.length
        p = self.rp
        buf = self.buf
        while done < n:
            m = min(N - 1, n - done, N - p)
            cur = buf[p:p + m]
            if p + m < N:
                nxt = buf[p + 1:p + m + 1]
            else:
                nxt = np.concatenate((buf[p + 1:N], buf[0:1]))
            out[done:done + m] = cur
            buf[p:p + m] = g * (b * cur + (1.0 - b) * nxt)
            done += m
            p = (p + m) % N
        self.rp = p
        return out


def _gen(unit_id, name, algorithm, variation, cls, preset):
    register(UnitDescriptor(
        unit_id=unit_id, kind="generator", name=name, base_algorithm=algorithm,
        variation=variation, params=GENERATOR_PARAMS, factory=cls,
        preset=preset, defaults=GENERATOR_DEFAULTS))


SINE_ID = 0

_SINE_SETS = [
    ("sine", ((1.0, 1.0),)),
    ("sine octave", ((1.0, 1.0), (2.0, 0.5))),
    ("sine fifth", ((1.0, 1.0), (1.5, 0.5))),
    ("sine sub", ((1.0, 1.0), (0.5, 0.5))),
    ("sine organ", ((1.0, 1.0), (2.0, 0.5), (4.0, 0.25))),
    ("sine bright", ((1.0, 1.0), (2.0, 0.35), (3.0, 0.2))),
]
for _i, (_name, _partials) in enumerate(_SINE_SETS):
    _gen(SINE_ID + _i, _name, "sine", _i, SineGen, {"partials": _partials})

_SQUARE_SETS = [
    ("square", False, 0.5),
    ("square blep", True, 0.5),
    ("square pw40", True, 0.40),
    ("square pw30", True, 0.30),
    ("square pw20", True, 0.20),
    ("square pw10", True, 0.10),
]
for _i, (_name, _blep, _w) in enumerate(_SQUARE_SETS):
    _gen(20 + _i, _name, "square", _i, SquareGen, {"blep": _blep, "width": _w})

_SAW_SETS = [
    ("saw", False, (0.0,)),
    ("saw blep", True, (0.0,)),
    ("saw stack3", False, (-8.0, 0.0, 8.0)),
    ("saw stack5", False, (-14.0, -7.0, 0.0, 7.0, 14.0)),
]
for _i, (_name, _blep, _det) in enumerate(_SAW_SETS):
    _gen(40 + _i, _name, "saw", _i, SawGen, {"blep": _blep, "detunes": _det})

_TRI_SETS = [("triangle", 1.0), ("triangle fold2", 2.0),
             ("triangle fold4", 4.0), ("triangle fold8", 8.0)]
for _i, (_name, _fold) in enumerate(_TRI_SETS):
    _gen(60 + _i, _name, "triangle", _i, TriangleGen, {"fold": _fold})

_NOISE_SETS = ["white", "pink", "brown", "blue", "crackle"]
for _i, _color in enumerate(_NOISE_SETS):
    _gen(80 + _i, f"noise {_color}", "noise", _i, NoiseGen, {"color": _color})

_SAMPLE_SETS = ["loop", "once", "reverse"]
for _i, _mode in enumerate(_SAMPLE_SETS):
    _gen(100 + _i, f"sample player {_mode}", "sample_player", _i, SamplePlayer,
         {"mode": _mode})

_FM_RATIOS = (1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0)
_i = 0
for _r in _FM_RATIOS:
    for _idx_name, _idx in (("lo", 2.0), ("hi", 6.0)):
        _gen(120 + _i, f"fm {_r:g}x {_idx_name}", "fm", _i, FmGen,
             {"ratio": _r, "index": _idx})
        _i += 1

_PLUCK_SETS = [
    ("pluck bright", 0.996, 0.40),
    ("pluck mellow", 0.993, 0.65),
    ("pluck muted", 0.985, 0.80),
    ("pluck drone", 0.9995, 0.50),
    ("pluck harp", 0.994, 0.55),
    ("pluck wire", 0.997, 0.20),
]
for _i, (_name, _g, _b) in enumerate(_PLUCK_SETS):
    _gen(140 + _i, _name, "pluck", _i, PluckGen, {"gain": _g, "blend": _b})
