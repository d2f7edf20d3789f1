"""Performance gestures over control events: loops, arpeggios, snapshots.

Everything here is a pure function over value data.  Loop replay is
anchored at absolute time zero: an event recorded at t fires at t, t+L,
t+2L, ...; windows just select which occurrences are visible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .address import ParamAddress, parse_address
from .errors import SchemaError, ValueRangeError
from .events import ControlEvent


@dataclass(frozen=True)
class GestureLoop:
    """A recorded window of events, replayed cyclically.

    Event times are loop-relative and strictly below length_ms.  scope,
    when set, is the (track, slot) pair the recording was filtered to.
    """

    events: Tuple[ControlEvent, ...]
    length_ms: int
    scope: Optional[Tuple[int, str]] = None

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        if self.length_ms <= 0:
            raise ValueRangeError(f"loop length {self.length_ms} must be positive")
        last = 0
        for ev in self.events:
            if not 0 <= ev.time_ms < self.length_ms:
                raise ValueRangeError(
                    f"loop event at {ev.time_ms} outside [0, {self.length_ms})")
            if ev.time_ms < last:
                raise ValueRangeError("loop events must be time-ordered")
            last = ev.time_ms


def loop_record(start_ms: int, stop_ms: int, captured: List[ControlEvent],
                scope: Optional[Tuple[int, str]] = None) -> GestureLoop:
    """Re-base events captured in [start_ms, stop_ms) to loop-relative time."""
    if stop_ms <= start_ms:
        raise ValueRangeError(f"empty record window [{start_ms}, {stop_ms})")
    kept = []
    for ev in captured:
        if not start_ms <= ev.time_ms < stop_ms:
            raise ValueRangeError(
                f"captured event at {ev.time_ms} outside [{start_ms}, {stop_ms})")
        if scope is not None and (ev.address.track, ev.address.slot) != scope:
            continue
        kept.append(ev.shifted(-start_ms))
    kept.sort(key=lambda ev: ev.time_ms)  # stable: arrival order kept on ties
    return GestureLoop(events=tuple(kept), length_ms=stop_ms - start_ms, scope=scope)


def loop_events(loop: GestureLoop, from_ms: int, to_ms: int) -> List[ControlEvent]:
    """All cyclic occurrences with absolute time in [from_ms, to_ms), ordered.

    Querying [a,b) then [b,c) concatenates to exactly the query of [a,c).
    """
    if to_ms < from_ms:
        raise ValueRangeError(f"bad window [{from_ms}, {to_ms})")
    L = loop.length_ms
    out: List[Tuple[int, int, ControlEvent]] = []
    for idx, ev in enumerate(loop.events):
        k0 = max(0, -(-(from_ms - ev.time_ms) // L))  # ceil division
        t = ev.time_ms + k0 * L
        while t < to_ms:
            out.append((t, idx, ev.shifted(t - ev.time_ms)))
            t += L
    out.sort(key=lambda item: (item[0], item[1]))
    return [ev for _, _, ev in out]


def play_once(loop: GestureLoop, at_ms: int) -> List[ControlEvent]:
    """One non-cyclic pass of a loop starting at at_ms (a "sequence")."""
    return [ev.shifted(at_ms) for ev in loop.events]


@dataclass(frozen=True)
class ArpeggioConfig:
    """Steps a frequency-like generator param through a cyclic value list."""

    target: ParamAddress
    steps: Tuple[float, ...]
    step_ms: int
    retrigger: bool = False

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        if not 1 <= len(self.steps) <= 16:
            raise ValueRangeError("arpeggio needs 1..16 steps")
        if self.step_ms <= 0:
            raise ValueRangeError("step_ms must be positive")
        for v in self.steps:
            if not 0.0 <= v <= 1.0:
                raise ValueRangeError(f"step value {v} outside [0, 1]")


def arpeggio_events(config: ArpeggioConfig, from_ms: int, to_ms: int) -> List[ControlEvent]:
    """Set (and optionally trigger) events at every multiple of step_ms in
    the window; step indices are anchored at absolute time zero."""
    if to_ms < from_ms:
        raise ValueRangeError(f"bad window [{from_ms}, {to_ms})")
    out: List[ControlEvent] = []
    trig_addr = ParamAddress(config.target.track, "g", ("param", 0))
    n = max(0, -(-from_ms // config.step_ms))  # first step index in window
    t = n * config.step_ms
    while t < to_ms:
        value = config.steps[n % len(config.steps)]
        out.append(ControlEvent(t, config.target, "set", value))
        if config.retrigger:
            out.append(ControlEvent(t, trig_addr, "trigger"))
        n += 1
        t += config.step_ms
    return out


@dataclass(frozen=True)
class Snapshot:
    """Full normalized image of every base param and LFO field."""

    image: Dict[str, float] = field(default_factory=dict)
    label: str = ""


def snapshot_take(image: Dict[str, float], label: str = "") -> Snapshot:
    """Freeze a parameter image (see Engine.param_image) into a snapshot."""
    return Snapshot(image=dict(image), label=label)


def snapshot_restore(snapshot: Snapshot, current: Dict[str, float],
                     at_ms: int = 0) -> List[ControlEvent]:
    """Events that bring `current` to the snapshot image: one set/lfo_set
    per differing entry.  Raises SchemaError if the images disagree on
    which parameters exist (catalog drift)."""
    missing = set(snapshot.image) ^ set(current)
    if missing:
        raise SchemaError(f"snapshot schema mismatch at {sorted(missing)[0]}")
    out: List[ControlEvent] = []
    for key in sorted(snapshot.image):
        want = snapshot.image[key]
        if current[key] == want:
            continue
        addr = parse_address(key)
        kind = "set" if addr.item[0] == "param" else "lfo_set"
        out.append(ControlEvent(at_ms, addr, kind, want))
    return out
