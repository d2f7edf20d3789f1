"""Unit catalog: every generator and processor algorithm plus variations.

Unit ids are laid out in per-family banks and are append-only: persisted
scorefiles must keep resolving to the same algorithm forever.  New
variations go at the end of their family bank; new families get new banks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Tuple

import numpy as np

from ..dsp import ParamBlock, constant_params
from ..errors import CatalogError, SchemaError
from ..mapping import ParamSpec


@dataclass(frozen=True)
class UnitDescriptor:
    """Catalog entry: identity, parameter schema, and instance factory."""

    unit_id: int
    kind: str  # "generator" | "processor"
    name: str
    base_algorithm: str
    variation: int
    params: Tuple[ParamSpec, ...]
    factory: Callable = field(compare=False, repr=False)
    preset: dict = field(compare=False, repr=False, default_factory=dict)
    defaults: Tuple[float, ...] = ()

    def make(self, sample_rate: int, rng: np.random.Generator):
        return self.factory(self, sample_rate, rng)


class Unit:
    """Base of all running unit instances.

    Subclasses implement _render(inp, params) -> (block, 2) float64 and may
    override reset/trigger.  Instances are single-owner; the engine drives
    one block at a time.
    """

    def __init__(self, desc: UnitDescriptor, sample_rate: int, rng: np.random.Generator):
        self.desc = desc
        self.sample_rate = sample_rate
        self.rng = rng

    def reset(self) -> None:
        pass

    def trigger(self) -> None:
        pass

    def process(self, inp, params: ParamBlock) -> np.ndarray:
        return self._render(inp, params)

    def _render(self, inp, params: ParamBlock) -> np.ndarray:
        raise NotImplementedError


_REGISTRY: Dict[int, UnitDescriptor] = {}
_SORTED: List[UnitDescriptor] = []


def register(desc: UnitDescriptor) -> UnitDescriptor:
    if desc.unit_id in _REGISTRY:
        raise CatalogError(f"duplicate unit id {desc.unit_id}")
    for other in _REGISTRY.values():
        if (other.base_algorithm, other.variation) == (desc.base_algorithm, desc.variation):
            raise CatalogError(
                f"duplicate (algorithm, variation) = "
                f"({desc.base_algorithm}, {desc.variation})")
    if len(desc.params) < 1:
        raise CatalogError(f"unit {desc.unit_id} has an empty param schema")
    if len(desc.defaults) != len(desc.params):
        raise CatalogError(f"unit {desc.unit_id} defaults do not match schema arity")
    _REGISTRY[desc.unit_id] = desc
    _SORTED.clear()
    return desc


def catalog_list() -> List[UnitDescriptor]:
    """All descriptors sorted by unit_id (stable across calls)."""
    if not _SORTED:
        _SORTED.extend(sorted(_REGISTRY.values(), key=lambda d: d.unit_id))
    return list(_SORTED)


def get_descriptor(unit_id: int) -> UnitDescriptor:
    try:
        return _REGISTRY[unit_id]
    except KeyError:
        raise CatalogError(f"unknown unit id {unit_id}") from None


def default_params(unit_id: int) -> Tuple[float, ...]:
    return get_descriptor(unit_id).defaults


def instantiate(unit_id: int, sample_rate: int, seed: int = 0,
                rng: np.random.Generator | None = None) -> Unit:
    """Fresh unit instance; deterministic given (unit_id, sample_rate, seed)."""
    desc = get_descriptor(unit_id)
    if rng is None:
        rng = np.random.default_rng((seed, unit_id))
    return desc.make(sample_rate, rng)


def resolve_params(unit_id: int, normalized, block_size: int) -> ParamBlock:
    """Map normalized values through a unit's schema for one block."""
    desc = get_descriptor(unit_id)
    vals = list(normalized)
    if len(vals) != len(desc.params):
        raise SchemaError(
            f"unit {unit_id} ({desc.name}) takes {len(desc.params)} params, "
            f"got {len(vals)}")
    return constant_params(desc, vals, block_size)


from . import generators as _generators  # noqa: E402  (registration side effects)
from . import processors as _processors  # noqa: E402

SINE_ID = _generators.SINE_ID
BYPASS_ID = _processors.BYPASS_ID

GeneratorUnit = _generators.GeneratorUnit
SamplePlayer = _generators.SamplePlayer
default_tone = _generators.default_tone

GENERATOR_DEFAULTS = _generators.GENERATOR_DEFAULTS
FREQ_PARAM = _generators.FREQ_PARAM
LEVEL_PARAM = _generators.LEVEL_PARAM
DECAY_PARAM = _generators.DECAY_PARAM
TIMBRE_PARAM = _generators.TIMBRE_PARAM
PAN_PARAM = _generators.PAN_PARAM
