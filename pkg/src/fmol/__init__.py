"""fmol: a six-track collaborative software synthesizer.

Six stereo tracks, each one sound generator into three serial processors,
four LFOs on every unit, driven by timestamped control events.  Ships with
a compact text scorefile format, a deterministic offline renderer, a live
WebSocket session host with oscilloscope feedback, and an HTTP piece
database for sharing compositions.
"""

from .address import ParamAddress, parse_address
from .engine import Engine, make_engine, modulated_param
from .errors import (AddressError, CatalogError, FmolError, ParseError,
                     PatchError, SchemaError, ValueRangeError)
from .events import ControlEvent
from .lfo import lfo_value
from .patch import (LfoConfig, Patch, TrackConfig, UnitConfig, default_patch,
                    validate_patch)

__version__ = "0.1.0"

__all__ = [
    "AddressError", "CatalogError", "ControlEvent", "Engine", "FmolError",
    "LfoConfig", "ParamAddress", "ParseError", "Patch", "PatchError",
    "SchemaError", "TrackConfig", "UnitConfig", "ValueRangeError",
    "default_patch", "lfo_value", "make_engine", "modulated_param",
    "parse_address", "validate_patch", "__version__",
]
