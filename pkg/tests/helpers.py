"""Shared test utilities: patch builders, brute-force oracles, random scores.

Oracles here are deliberately independent of the code paths they check:
loop/schedule expansion is done by exhaustive enumeration, spectra via
numpy's FFT, extrema via full scans.
"""

from __future__ import annotations

import random
from typing import List, Tuple

import numpy as np

from fmol import catalog
from fmol.address import SLOTS, ParamAddress
from fmol.events import ControlEvent
from fmol.gestures import GestureLoop
from fmol.lfo import SHAPES
from fmol.patch import LfoConfig, Patch, TrackConfig, UnitConfig, default_patch
from fmol.scorefile import Scorefile


def unit_id_by_name(name: str) -> int:
    for d in catalog.catalog_list():
        if d.name == name:
            return d.unit_id
    raise KeyError(name)


def freq_norm(hz: float, unit_id: int = 0, param: int = 0) -> float:
    """Normalized setting that maps to the given frequency for a unit."""
    return catalog.get_descriptor(unit_id).params[param].to_normalized(hz)


def patch_with(track0_gen: int = None, track0_procs=None, gain: float = 0.8) -> Patch:
    """Default patch with track 0's units replaced."""
    base = default_patch()
    tracks = list(base.tracks)
    t0 = tracks[0]
    gen = t0.generator if track0_gen is None else \
        UnitConfig(track0_gen, catalog.default_params(track0_gen))
    procs = t0.processors if track0_procs is None else tuple(
        UnitConfig(pid, catalog.default_params(pid)) for pid in track0_procs)
    tracks[0] = TrackConfig(generator=gen, processors=procs, gain=gain)
    return Patch(tracks=tuple(tracks))


def addr(track: int, slot: str, k: int) -> ParamAddress:
    return ParamAddress(track, slot, ("param", k))


def lfo_addr(track: int, slot: str, j: int, field: str) -> ParamAddress:
    return ParamAddress(track, slot, ("lfo", j, field))


# -- brute-force oracles -----------------------------------------------------

def brute_loop_occurrences(loop: GestureLoop, from_ms: int, to_ms: int) -> List[ControlEvent]:
    """Enumerate every cycle intersecting the window; independent of
    fmol.gestures.loop_events."""
    out = []
    k = 0
    while True:
        base = k * loop.length_ms
        if base >= to_ms:
            break
        for idx, ev in enumerate(loop.events):
            t = base + ev.time_ms
            if from_ms <= t < to_ms:
                out.append((t, idx, ev.shifted(t - ev.time_ms)))
        k += 1
    out.sort(key=lambda item: (item[0], item[1]))
    return [ev for _, _, ev in out]


def brute_schedule(score: Scorefile) -> List[ControlEvent]:
    """Expand-then-sort merge oracle for fmol.scorefile.schedule."""
    tagged = [(ev.time_ms, 0, i, ev) for i, ev in enumerate(score.events)]
    seq = 0
    for loop, (a, b) in score.loops:
        lo, hi = max(0, a), min(b, score.duration_ms)
        for ev in brute_loop_occurrences(loop, lo, hi):
            tagged.append((ev.time_ms, 1, seq, ev))
            seq += 1
    tagged.sort(key=lambda item: (item[0], item[1], item[2]))
    return [item[3] for item in tagged]


def spectrum_peak_hz(mono: np.ndarray, sample_rate: int) -> float:
    """Frequency of the magnitude-spectrum peak (DC excluded)."""
    mags = np.abs(np.fft.rfft(mono))
    mags[0] = 0.0
    return float(np.argmax(mags) * sample_rate / len(mono))


# -- random scorefile corpus --------------------------------------------------

_SAFE_TEXT = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 _-"


def _rand_text(rnd: random.Random, max_len: int = 24) -> str:
    n = rnd.randrange(0, max_len)
    return "".join(rnd.choice(_SAFE_TEXT) for _ in range(n)).strip()


def _rand_lfo(rnd: random.Random, arity: int) -> LfoConfig:
    if rnd.random() < 0.7:
        return LfoConfig()
    target = None if rnd.random() < 0.3 else rnd.randrange(arity)
    return LfoConfig(rate=round(rnd.uniform(0, 20), 4),
                     depth=round(rnd.random(), 4),
                     shape=rnd.choice(SHAPES),
                     target=target)


def _rand_unit(rnd: random.Random, kind: str) -> UnitConfig:
    choices = [d for d in catalog.catalog_list() if d.kind == kind]
    d = rnd.choice(choices)
    params = tuple(round(rnd.random(), 6) for _ in d.params)
    lfos = tuple(_rand_lfo(rnd, len(d.params)) for _ in range(4))
    return UnitConfig(d.unit_id, params, lfos)


def _rand_event(rnd: random.Random, patch: Patch, t: int) -> ControlEvent:
    track = rnd.randrange(6)
    slot = rnd.choice(SLOTS)
    unit = patch.unit(track, SLOTS.index(slot))
    arity = len(catalog.get_descriptor(unit.unit_id).params)
    roll = rnd.random()
    if roll < 0.15 and slot == "g":
        return ControlEvent(t, ParamAddress(track, "g", ("param", 0)), "trigger")
    if roll < 0.3:
        field = rnd.choice(("rate", "depth", "shape", "target"))
        a = ParamAddress(track, slot, ("lfo", rnd.randrange(4), field))
        return ControlEvent(t, a, "lfo_set", round(rnd.random(), 6))
    a = ParamAddress(track, slot, ("param", rnd.randrange(arity)))
    return ControlEvent(t, a, "set", round(rnd.random(), 6))


def random_scorefile(rnd: random.Random, max_events: int = 40,
                     max_loops: int = 3, duration_range=(500, 20000)) -> Scorefile:
    duration = rnd.randrange(*duration_range)
    sample_rate = rnd.choice((22050, 44100, 48000))
    tracks = tuple(
        TrackConfig(generator=_rand_unit(rnd, "generator"),
                    processors=tuple(_rand_unit(rnd, "processor") for _ in range(3)),
                    gain=round(rnd.random(), 4))
        for _ in range(6))
    patch = Patch(tracks=tracks, sample_rate_hint=sample_rate)
    times = sorted(rnd.randrange(duration) for _ in range(rnd.randrange(max_events + 1)))
    events = tuple(_rand_event(rnd, patch, t) for t in times)
    loops = []
    for _ in range(rnd.randrange(max_loops + 1)):
        length = rnd.randrange(50, 5000)
        lt = sorted(rnd.randrange(length) for _ in range(rnd.randrange(5)))
        levs = tuple(_rand_event(rnd, patch, t) for t in lt)
        a = rnd.randrange(0, duration)
        b = rnd.randrange(a + 1, duration + 5000)
        loops.append((GestureLoop(levs, length), (a, b)))
    return Scorefile(sample_rate=sample_rate,
                     seed=rnd.randrange(2 ** 64),
                     duration_ms=duration,
                     patch=patch,
                     events=events,
                     loops=tuple(loops),
                     title=_rand_text(rnd),
                     author=_rand_text(rnd))
