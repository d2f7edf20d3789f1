"""Patch data model: the fixed 6-track, 1 generator + 3 processor topology."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

from .address import ParamAddress
from .errors import PatchError, ValueRangeError
from .lfo import LFO_RATE_MAX_HZ, SHAPES

NUM_TRACKS = 6
NUM_PROCESSORS = 3
NUM_LFOS = 4

SAMPLE_RATES = (22050, 44100, 48000)


@dataclass(frozen=True)
class LfoConfig:
    """One LFO slot: rate in Hz [0, 20], normalized depth, shape, target.

    target is the parameter index of the owning unit, or None for off.
    """

    rate: float = 0.0
    depth: float = 0.0
    shape: str = "sine"
    target: Optional[int] = None

    def __post_init__(self):
        if not 0.0 <= self.rate <= LFO_RATE_MAX_HZ:
            raise ValueRangeError(f"LFO rate {self.rate} outside [0, {LFO_RATE_MAX_HZ}]")
        if not 0.0 <= self.depth <= 1.0:
            raise ValueRangeError(f"LFO depth {self.depth} outside [0, 1]")
        if self.shape not in SHAPES:
            raise ValueRangeError(f"unknown LFO shape {self.shape!r}")
        if self.target is not None and self.target < 0:
            raise ValueRangeError(f"negative LFO target {self.target}")


DEFAULT_LFOS: Tuple[LfoConfig, ...] = tuple(LfoConfig() for _ in range(NUM_LFOS))


@dataclass(frozen=True)
class UnitConfig:
    """Catalog unit choice plus its normalized parameter values and 4 LFOs."""

    unit_id: int
    params: Tuple[float, ...]
    lfos: Tuple[LfoConfig, ...] = DEFAULT_LFOS

    def __post_init__(self):
        if self.unit_id < 0:
            raise PatchError(f"negative unit id {self.unit_id}")
        object.__setattr__(self, "params", tuple(self.params))
        object.__setattr__(self, "lfos", tuple(self.lfos))
        for v in self.params:
            if not 0.0 <= v <= 1.0:
                raise ValueRangeError(f"param value {v} outside [0, 1]")
        if len(self.lfos) != NUM_LFOS:
            raise PatchError(f"unit has {len(self.lfos)} LFOs, expected {NUM_LFOS}")


@dataclass(frozen=True)
class TrackConfig:
    """One synthesis voice: a generator into three serial processors."""

    generator: UnitConfig
    processors: Tuple[UnitConfig, ...]
    gain: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "processors", tuple(self.processors))
        if len(self.processors) != NUM_PROCESSORS:
            raise PatchError(
                f"track has {len(self.processors)} processors, expected {NUM_PROCESSORS}")
        if not 0.0 <= self.gain <= 1.0:
            raise ValueRangeError(f"track gain {self.gain} outside [0, 1]")


@dataclass(frozen=True)
class Patch:
    """Full instrument configuration: exactly six tracks."""

    tracks: Tuple[TrackConfig, ...]
    sample_rate_hint: int = 44100

    def __post_init__(self):
        object.__setattr__(self, "tracks", tuple(self.tracks))
        if len(self.tracks) != NUM_TRACKS:
            raise PatchError(f"patch has {len(self.tracks)} tracks, expected {NUM_TRACKS}")
        if self.sample_rate_hint <= 0:
            raise ValueRangeError(f"bad sample rate hint {self.sample_rate_hint}")

    def unit(self, track: int, slot_index: int) -> UnitConfig:
        """slot_index 0 is the generator, 1..3 the processors."""
        t = self.tracks[track]
        return t.generator if slot_index == 0 else t.processors[slot_index - 1]

    def resolve(self, address: ParamAddress) -> UnitConfig:
        """Return the unit a ParamAddress points into, or raise PatchError."""
        if not 0 <= address.track < NUM_TRACKS:
            raise PatchError(f"track {address.track} out of range")
        return self.unit(address.track, address.slot_index)


def validate_patch(patch: Patch) -> None:
    """Check a patch against the catalog: ids, arities, LFO targets.

    Topology violations raise from the dataclass constructors already;
    this adds the catalog-dependent checks.
    """
    from . import catalog
    from .errors import SchemaError

    for ti, track in enumerate(patch.tracks):
        units = [("g", track.generator)] + \
            [(f"p{i}", p) for i, p in enumerate(track.processors)]
        for slot, unit in units:
            desc = catalog.get_descriptor(unit.unit_id)  # raises CatalogError
            if slot == "g" and desc.kind != "generator":
                raise SchemaError(
                    f"t{ti}.{slot}: unit {unit.unit_id} ({desc.name}) is not a generator")
            if slot != "g" and desc.kind != "processor":
                raise SchemaError(
                    f"t{ti}.{slot}: unit {unit.unit_id} ({desc.name}) is not a processor")
            if len(unit.params) != len(desc.params):
                raise SchemaError(
                    f"t{ti}.{slot}: unit {unit.unit_id} ({desc.name}) takes "
                    f"{len(desc.params)} params, got {len(unit.params)}")
            for li, lc in enumerate(unit.lfos):
                if lc.target is not None and lc.target >= len(desc.params):
                    raise SchemaError(
                        f"t{ti}.{slot}.lfo{li}: target {lc.target} outside schema "
                        f"of unit {unit.unit_id} ({desc.name})")


def default_patch() -> Patch:
    """Six sine-generator tracks with bypass processors, all LFOs off."""
    from . import catalog

    gen = UnitConfig(catalog.SINE_ID, catalog.default_params(catalog.SINE_ID))
    byp = UnitConfig(catalog.BYPASS_ID, catalog.default_params(catalog.BYPASS_ID))
    track = TrackConfig(generator=gen, processors=(byp, byp, byp), gain=0.8)
    return Patch(tracks=tuple(track for _ in range(NUM_TRACKS)))
