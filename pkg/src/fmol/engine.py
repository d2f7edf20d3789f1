"""Deterministic block renderer for the six-track architecture.

Control events land at block boundaries; LFOs are evaluated once per block
and modulated parameters ramp linearly across it, which also gives set
events a one-block smoothing ramp.  Given (patch, seed, event sequence,
sample rate, block size) the rendered output is bit-reproducible.
"""

from __future__ import annotations

from typing import Dict, List, Optional

import numpy as np

from . import catalog
from .address import SLOTS, ParamAddress
from .dsp import ParamBlock, ramp_fractions
from .errors import AddressError, ValueRangeError
from .events import ControlEvent
from .lfo import SHAPES, LfoState
from .mapping import clamp01
from .patch import (NUM_LFOS, NUM_TRACKS, SAMPLE_RATES, LfoConfig, Patch,
                    TrackConfig, UnitConfig, validate_patch)

DEFAULT_BLOCK_SIZE = 64


def modulated_param(base: float, depth: float, lfo: float) -> float:
    """Apply one LFO sample to a base value: clamp(base + depth * lfo)."""
    return clamp01(base + depth * lfo)


def frames_for_ms(ms: int, sample_rate: int) -> int:
    return ms * sample_rate // 1000


class _Slot:
    """Runtime of one unit slot: instance, base params, LFOs, ramp memory."""

    __slots__ = ("desc", "unit", "base", "prev", "lfos", "armed")

    def __init__(self, desc, unit, base, lfos):
        self.desc = desc
        self.unit = unit
        self.base = base            # normalized, list[float]
        self.prev = list(base)      # trajectory value at end of previous block
        self.lfos = lfos
        self.armed = False


class Engine:
    """Owns all unit states and renders (block, 2) float32 stereo blocks.

    Single-owner by contract: one logical thread calls apply_event and
    render_block; hosts hand events over through their own ordered queue.
    """

    def __init__(self, patch: Patch, sample_rate: int, seed: int = 0,
                 block_size: int = DEFAULT_BLOCK_SIZE,
                 sample: Optional[tuple] = None):
        if sample_rate not in SAMPLE_RATES:
            raise ValueRangeError(
                f"sample rate {sample_rate} not in {SAMPLE_RATES}")
        validate_patch(patch)
        self.sample_rate = sample_rate
        self.block_size = block_size
        self.seed = seed
        self.frames = 0
        self.gains = [t.gain for t in patch.tracks]
        self.tracks: List[List[_Slot]] = []
        self.last_tracks: List[Optional[np.ndarray]] = [None] * NUM_TRACKS
        for ti, tc in enumerate(patch.tracks):
            row = []
            for si, uc in enumerate([tc.generator, *tc.processors]):
                desc = catalog.get_descriptor(uc.unit_id)
                rng = np.random.default_rng((seed, ti, si, 1000))
                unit = desc.make(sample_rate, rng)
                if sample is not None and isinstance(unit, catalog.SamplePlayer):
                    unit.set_tone(*sample)
                lfos = []
                for j, lc in enumerate(uc.lfos):
                    lrng = np.random.default_rng((seed, ti, si, j))
                    target = -1 if lc.target is None else lc.target
                    lfos.append(LfoState(lc.rate, lc.depth, lc.shape, target, lrng))
                row.append(_Slot(desc, unit, list(uc.params), lfos))
            self.tracks.append(row)

    # -- control plane ----------------------------------------------------

    def _slot(self, address: ParamAddress) -> _Slot:
        if not 0 <= address.track < NUM_TRACKS:
            raise AddressError(f"track out of range in {address.text()}")
        return self.tracks[address.track][address.slot_index]

    def apply_event(self, event: ControlEvent) -> None:
        """Apply one control event; takes effect from the next block on."""
        slot = self._slot(event.address)
        item = event.address.item
        if event.kind == "trigger":
            if event.address.slot != "g":
                raise AddressError(
                    f"trigger must address a generator, got {event.address.text()}")
            slot.armed = True
            return
        if item[0] == "param":
            k = item[1]
            if k >= len(slot.base):
                raise AddressError(
                    f"param index out of range in {event.address.text()}")
            if event.kind != "set":
                raise AddressError(
                    f"{event.kind} cannot address a base param: {event.address.text()}")
            slot.base[k] = event.value
            return
        # lfo field
        if event.kind != "lfo_set":
            raise AddressError(
                f"{event.kind} cannot address an LFO field: {event.address.text()}")
        _, j, field = item
        lfo = slot.lfos[j]
        v = event.value
        if field == "rate":
            lfo.rate_norm = v
        elif field == "depth":
            lfo.depth = v
        elif field == "shape":
            lfo.shape = SHAPES[min(len(SHAPES) - 1, int(v * len(SHAPES)))]
        else:  # target
            idx = int(round(v * len(slot.base))) - 1
            lfo.target = min(idx, len(slot.base) - 1)

    def base_value(self, address: ParamAddress) -> float:
        """Read back a base param or LFO field (normalized), for inspection."""
        slot = self._slot(address)
        item = address.item
        if item[0] == "param":
            return slot.base[item[1]]
        _, j, field = item
        lfo = slot.lfos[j]
        if field == "rate":
            return lfo.rate_norm
        if field == "depth":
            return lfo.depth
        if field == "shape":
            return (SHAPES.index(lfo.shape) + 0.5) / len(SHAPES)
        return 0.0 if lfo.target < 0 else (lfo.target + 1) / len(slot.base)

    # -- render path -------------------------------------------------------

    def _slot_params(self, slot: _Slot) -> ParamBlock:
        n = self.block_size
        targets = None
        for lfo in slot.lfos:
            if lfo.target >= 0 and lfo.depth != 0.0:
                if targets is None:
                    targets = {}
                k = lfo.target
                targets[k] = targets.get(k, 0.0) + lfo.depth * lfo.value()
        norm: list = []
        for k, b in enumerate(slot.base):
            t = clamp01(b + targets[k]) if targets and k in targets else b
            p = slot.prev[k]
            if t == p:
                norm.append(t)
            else:
                norm.append(p + (t - p) * ramp_fractions(n))
                slot.prev[k] = t
        return ParamBlock(slot.desc, norm, n)

    def render_block(self, limit: bool = True) -> np.ndarray:
        """Render one block through every chain and the master soft-clip.

        Returns float32 (block, 2); a C-order ravel of it is the interleaved
        stereo interface form.  limit=False is an inspection mode that skips
        the limiter and the float32 cast, exposing the raw float64 mix.
        """
        n = self.block_size
        master = np.zeros((n, 2))
        for ti, row in enumerate(self.tracks):
            buf = None
            for slot in row:
                if slot.armed:
                    slot.unit.trigger()
                    slot.armed = False
                buf = slot.unit.process(buf, self._slot_params(slot))
            out = buf * self.gains[ti]
            self.last_tracks[ti] = out
            master += out
        for row in self.tracks:
            for slot in row:
                for lfo in slot.lfos:
                    if lfo.rate_norm != 0.0:
                        lfo.advance(n, self.sample_rate)
        self.frames += n
        if not limit:
            return master
        return np.tanh(master).astype(np.float32)

    # -- state inspection --------------------------------------------------

    def param_image(self) -> Dict[str, float]:
        """Flat address -> normalized value image of every base param and
        LFO field; the currency of snapshots and the session state message."""
        img: Dict[str, float] = {}
        for ti, row in enumerate(self.tracks):
            for si, slot in enumerate(row):
                prefix = f"t{ti}.{SLOTS[si]}"
                for k, b in enumerate(slot.base):
                    img[f"{prefix}.param{k}"] = b
                for j, lfo in enumerate(slot.lfos):
                    img[f"{prefix}.lfo{j}.rate"] = lfo.rate_norm
                    img[f"{prefix}.lfo{j}.depth"] = lfo.depth
                    img[f"{prefix}.lfo{j}.shape"] = \
                        (SHAPES.index(lfo.shape) + 0.5) / len(SHAPES)
                    img[f"{prefix}.lfo{j}.target"] = \
                        0.0 if lfo.target < 0 else (lfo.target + 1) / len(slot.base)
        return img

    def current_patch(self) -> Patch:
        """Reconstruct a Patch value from the live runtime state."""
        tracks = []
        for ti, row in enumerate(self.tracks):
            units = []
            for slot in row:
                lfos = tuple(
                    LfoConfig(rate=lfo.rate_hz, depth=lfo.depth, shape=lfo.shape,
                              target=None if lfo.target < 0 else lfo.target)
                    for lfo in slot.lfos)
                units.append(UnitConfig(slot.desc.unit_id, tuple(slot.base), lfos))
            tracks.append(TrackConfig(generator=units[0],
                                      processors=tuple(units[1:]),
                                      gain=self.gains[ti]))
        return Patch(tracks=tuple(tracks), sample_rate_hint=self.sample_rate)


def make_engine(patch: Patch, sample_rate: int, seed: int = 0,
                block_size: int = DEFAULT_BLOCK_SIZE,
                sample: Optional[tuple] = None) -> Engine:
    """Build an engine with all unit states silent and LFO phases at zero."""
    return Engine(patch, sample_rate, seed=seed, block_size=block_size,
                  sample=sample)
