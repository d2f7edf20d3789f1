"""Parameter addresses: textual form and resolution.

Two grammars, round-tripping exactly:

    t{track}.{g|p0|p1|p2}.param{k}
    t{track}.{g|p0|p1|p2}.lfo{j}.{rate|depth|shape|target}
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import AddressError

SLOTS = ("g", "p0", "p1", "p2")
LFO_FIELDS = ("rate", "depth", "shape", "target")

_PARAM_RE = re.compile(r"^t(\d+)\.(g|p0|p1|p2)\.param(\d+)$")
_LFO_RE = re.compile(r"^t(\d+)\.(g|p0|p1|p2)\.lfo([0-3])\.(rate|depth|shape|target)$")


@dataclass(frozen=True)
class ParamAddress:
    """Address of one base parameter or LFO field inside a 6-track patch.

    item is ("param", k) or ("lfo", j, field).
    """

    track: int
    slot: str  # "g" | "p0" | "p1" | "p2"
    item: tuple

    def __post_init__(self):
        if self.slot not in SLOTS:
            raise AddressError(f"bad slot {self.slot!r}")
        if self.item[0] == "param":
            if len(self.item) != 2 or self.item[1] < 0:
                raise AddressError(f"bad param item {self.item!r}")
        elif self.item[0] == "lfo":
            if len(self.item) != 3 or not 0 <= self.item[1] <= 3 \
                    or self.item[2] not in LFO_FIELDS:
                raise AddressError(f"bad lfo item {self.item!r}")
        else:
            raise AddressError(f"bad item {self.item!r}")

    @property
    def slot_index(self) -> int:
        """0 for the generator, 1..3 for the processor slots."""
        return SLOTS.index(self.slot)

    def text(self) -> str:
        if self.item[0] == "param":
            return f"t{self.track}.{self.slot}.param{self.item[1]}"
        _, j, fld = self.item
        return f"t{self.track}.{self.slot}.lfo{j}.{fld}"

    def __str__(self) -> str:
        return self.text()


def parse_address(text: str) -> ParamAddress:
    m = _PARAM_RE.match(text)
    if m:
        return ParamAddress(int(m.group(1)), m.group(2), ("param", int(m.group(3))))
    m = _LFO_RE.match(text)
    if m:
        return ParamAddress(int(m.group(1)), m.group(2),
                            ("lfo", int(m.group(3)), m.group(4)))
    raise AddressError(f"unparseable address {text!r}")
