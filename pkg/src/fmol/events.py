"""Timestamped control events: the one currency of all control planes."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .address import ParamAddress
from .errors import ValueRangeError

EVENT_KINDS = ("set", "trigger", "lfo_set")


@dataclass(frozen=True)
class ControlEvent:
    """A parameter change, excitation trigger, or LFO field update.

    time_ms is absolute for scorefiles and loop expansions, loop-relative
    inside a GestureLoop.  value is normalized [0,1] for set/lfo_set and
    None for trigger.
    """

    time_ms: int
    address: ParamAddress
    kind: str
    value: Optional[float] = None

    def __post_init__(self):
        if self.time_ms < 0:
            raise ValueRangeError(f"negative event time {self.time_ms}")
        if self.kind not in EVENT_KINDS:
            raise ValueRangeError(f"unknown event kind {self.kind!r}")
        if self.kind == "trigger":
            if self.value is not None:
                raise ValueRangeError("trigger events carry no value")
        else:
            if self.value is None:
                raise ValueRangeError(f"{self.kind} event requires a value")
            if not 0.0 <= self.value <= 1.0:
                raise ValueRangeError(f"value {self.value} outside [0, 1]")

    def shifted(self, delta_ms: int) -> "ControlEvent":
        return ControlEvent(self.time_ms + delta_ms, self.address, self.kind, self.value)
