"""Compact line-based text format for a patch plus timed events.

Canonical form (serialize) is byte-stable: fixed line order, one event per
line, shortest round-trip float text, no trailing whitespace.  The format
is documented in docs/scorefile-format.md; FMOLSCORE majors other than 1
are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import catalog
from .address import SLOTS, ParamAddress, parse_address
from .engine import Engine, frames_for_ms, make_engine
from .errors import AddressError, CatalogError, FmolError, ParseError
from .events import ControlEvent
from .gestures import GestureLoop, loop_events
from .lfo import LFO_RATE_MAX_HZ, SHAPES
from .patch import (NUM_TRACKS, SAMPLE_RATES, LfoConfig, Patch, TrackConfig,
                    UnitConfig)

FORMAT_VERSION = 1
MAGIC = "FMOLSCORE"

_DEFAULT_LFO = LfoConfig()


@dataclass(frozen=True)
class Scorefile:
    """A persisted composition: header, patch, events, loops, metadata."""

    sample_rate: int
    seed: int
    duration_ms: int
    patch: Patch
    events: Tuple[ControlEvent, ...] = ()
    loops: Tuple[Tuple[GestureLoop, Tuple[int, int]], ...] = ()
    title: str = ""
    author: str = ""
    version: int = FORMAT_VERSION

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        object.__setattr__(self, "loops", tuple(
            (loop, (int(a), int(b))) for loop, (a, b) in self.loops))
        if self.duration_ms <= 0:
            raise FmolError("duration must be positive")
        for name, value in (("title", self.title), ("author", self.author)):
            if value != value.strip() or any(ord(c) < 32 for c in value) \
                    or len(value.encode()) > 256:
                raise FmolError(f"bad meta {name}: needs single-line text <= 256 bytes")
        last = 0
        for ev in self.events:
            if ev.time_ms < last:
                raise FmolError("events must be sorted by time")
            if ev.time_ms >= self.duration_ms:
                raise FmolError(f"event at {ev.time_ms} ms beyond duration")
            last = ev.time_ms
        for _, (a, b) in self.loops:
            if a < 0 or b <= a:
                raise FmolError(f"bad loop window [{a}, {b})")


def _fmt(v: float) -> str:
    return repr(float(v))


def _target_text(target: Optional[int]) -> str:
    return "off" if target is None else str(target)


def serialize(score: Scorefile) -> str:
    """Canonical text: equal Scorefile values serialize to identical bytes."""
    lines = [f"{MAGIC} {score.version}",
             f"SR {score.sample_rate}",
             f"SEED {score.seed}",
             f"DUR {score.duration_ms}"]
    if score.title:
        lines.append(f"META TITLE {score.title}")
    if score.author:
        lines.append(f"META AUTHOR {score.author}")
    for i, t in enumerate(score.patch.tracks):
        parts = [f"TRACK {i} GAIN {_fmt(t.gain)}",
                 f"GEN {t.generator.unit_id}"]
        parts += [_fmt(p) for p in t.generator.params]
        for proc in t.processors:
            parts.append(f"PROC {proc.unit_id}")
            parts += [_fmt(p) for p in proc.params]
        lines.append(" ".join(parts))
    for i, t in enumerate(score.patch.tracks):
        for si, unit in enumerate([t.generator, *t.processors]):
            for j, lc in enumerate(unit.lfos):
                if lc == _DEFAULT_LFO:
                    continue
                lines.append(
                    f"LFO {i} {SLOTS[si]} {j} {_fmt(lc.rate)} {_fmt(lc.depth)} "
                    f"{lc.shape} {_target_text(lc.target)}")
    for ev in score.events:
        lines.append(_event_line(ev))
    for loop, (a, b) in score.loops:
        lines.append(f"LOOP {loop.length_ms} {a} {b}")
        for ev in loop.events:
            lines.append("  " + _event_line(ev))
    return "\n".join(lines) + "\n"


def _event_line(ev: ControlEvent) -> str:
    if ev.kind == "trigger":
        return f"EV {ev.time_ms} {ev.address.text()} trigger"
    return f"EV {ev.time_ms} {ev.address.text()} {ev.kind} {_fmt(ev.value)}"


class _Parser:
    def __init__(self, text: str):
        self.lines = text.split("\n")
        self.pos = 0

    def error(self, msg: str) -> ParseError:
        return ParseError(self.pos, msg)  # pos already advanced past the line

    def next_line(self) -> Optional[str]:
        """Next significant line (skips blanks and # comments); None at EOF."""
        while self.pos < len(self.lines):
            raw = self.lines[self.pos]
            self.pos += 1
            if raw.strip() == "" or raw.lstrip().startswith("#"):
                continue
            return raw
        return None

    def push_back(self):
        self.pos -= 1


def _to_int(p: _Parser, tok: str, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise p.error(f"bad {what}: {tok!r}") from None


def _to_float(p: _Parser, tok: str, what: str, lo=0.0, hi=1.0) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise p.error(f"bad {what}: {tok!r}") from None
    if not (lo <= v <= hi) or v != v:
        raise p.error(f"{what} {tok} outside [{lo}, {hi}]")
    return v


def _parse_unit(p: _Parser, toks: List[str], at: int, tag: str) -> Tuple[UnitConfig, int]:
    unit_id = _to_int(p, toks[at], f"{tag} unit id")
    try:
        desc = catalog.get_descriptor(unit_id)
    except CatalogError as exc:
        raise p.error(str(exc)) from None
    arity = len(desc.params)
    if at + 1 + arity > len(toks):
        raise p.error(f"{tag} unit {unit_id} ({desc.name}) needs {arity} params")
    params = tuple(_to_float(p, toks[at + 1 + k], f"{tag} param {k}")
                   for k in range(arity))
    return UnitConfig(unit_id, params), at + 1 + arity


def parse(text: str) -> Scorefile:
    """Parse and fully validate scorefile text.

    Raises ParseError with a 1-based line number on any syntactic or
    semantic problem (wrong track count, unknown unit, unsorted events...).
    """
    p = _Parser(text)
    line = p.next_line()
    if line is None:
        raise p.error("empty scorefile")
    toks = line.split()
    if len(toks) != 2 or toks[0] != MAGIC:
        raise p.error(f"expected '{MAGIC} <version>' magic line")
    version = _to_int(p, toks[1], "version")
    if version != FORMAT_VERSION:
        raise p.error(f"unsupported {MAGIC} version {version}")

    headers: Dict[str, int] = {}
    title = ""
    author = ""
    while True:
        line = p.next_line()
        if line is None:
            raise p.error("missing TRACK lines")
        toks = line.split()
        if toks[0] == "TRACK":
            p.push_back()
            break
        if toks[0] in ("SR", "SEED", "DUR"):
            if len(toks) != 2:
                raise p.error(f"{toks[0]} takes one value")
            if toks[0] in headers:
                raise p.error(f"duplicate {toks[0]} header")
            headers[toks[0]] = _to_int(p, toks[1], toks[0])
        elif toks[0] == "META":
            if len(toks) < 2 or toks[1] not in ("TITLE", "AUTHOR"):
                raise p.error("META needs TITLE or AUTHOR")
            value = line.split(None, 2)[2] if len(toks) > 2 else ""
            if toks[1] == "TITLE":
                title = value
            else:
                author = value
        else:
            raise p.error(f"unexpected line {toks[0]!r} before TRACK section")
    for req in ("SR", "SEED", "DUR"):
        if req not in headers:
            raise p.error(f"missing {req} header")
    sample_rate = headers["SR"]
    if sample_rate not in SAMPLE_RATES:
        raise p.error(f"SR {sample_rate} not one of {SAMPLE_RATES}")
    seed = headers["SEED"]
    if not 0 <= seed < 2 ** 64:
        raise p.error("SEED outside 64-bit range")
    duration = headers["DUR"]
    if duration <= 0:
        raise p.error("DUR must be positive")

    # -- exactly six TRACK lines, indices 0..5 in order ---------------------
    track_rows: List[List] = []
    while True:
        line = p.next_line()
        if line is None or not line.split()[0] == "TRACK":
            if len(track_rows) != NUM_TRACKS:
                raise p.error(
                    f"expected six tracks (0..5), got {len(track_rows)} TRACK lines")
            if line is not None:
                p.push_back()
            break
        toks = line.split()
        idx = _to_int(p, toks[1], "track index")
        if idx != len(track_rows) or idx >= NUM_TRACKS:
            raise p.error(
                f"track index {idx} breaks the six tracks 0..5 ordering")
        if len(toks) < 6 or toks[2] != "GAIN" or toks[4] != "GEN":
            raise p.error("TRACK line needs GAIN <g> GEN <id> <params> PROC ...")
        gain = _to_float(p, toks[3], "gain")
        gen, at = _parse_unit(p, toks, 5, "generator")
        gdesc = catalog.get_descriptor(gen.unit_id)
        if gdesc.kind != "generator":
            raise p.error(f"unit {gen.unit_id} ({gdesc.name}) is not a generator")
        procs = []
        for _ in range(3):
            if at >= len(toks) or toks[at] != "PROC":
                raise p.error("TRACK line needs exactly 3 PROC sections")
            proc, at = _parse_unit(p, toks, at + 1, "processor")
            pdesc = catalog.get_descriptor(proc.unit_id)
            if pdesc.kind != "processor":
                raise p.error(f"unit {proc.unit_id} ({pdesc.name}) is not a processor")
            procs.append(proc)
        if at != len(toks):
            raise p.error("trailing tokens on TRACK line")
        track_rows.append([gain, gen, procs])

    # -- LFO / EV / LOOP sections -------------------------------------------
    lfo_conf: Dict[Tuple[int, int, int], LfoConfig] = {}
    events: List[ControlEvent] = []
    loops: List[Tuple[GestureLoop, Tuple[int, int]]] = []
    last_time = 0

    def unit_arity(track: int, slot_index: int) -> int:
        uc = track_rows[track][1] if slot_index == 0 else track_rows[track][2][slot_index - 1]
        return len(catalog.get_descriptor(uc.unit_id).params)

    def check_address(addr: ParamAddress):
        if not 0 <= addr.track < NUM_TRACKS:
            raise p.error(f"track out of range in {addr.text()}")
        arity = unit_arity(addr.track, addr.slot_index)
        if addr.item[0] == "param" and addr.item[1] >= arity:
            raise p.error(f"param index out of range in {addr.text()}")
        if addr.item[0] == "lfo" and addr.item[2] == "target":
            pass  # value-encoded targets are clamped at apply time

    def parse_event(toks: List[str], limit: int, what: str) -> ControlEvent:
        if len(toks) < 4:
            raise p.error(f"{what} line needs: EV <ms> <address> <kind> [<value>]")
        t = _to_int(p, toks[1], "event time")
        if t < 0:
            raise p.error("event time must be non-negative")
        if t >= limit:
            raise p.error(f"event time {t} beyond its window ({limit} ms)")
        try:
            addr = parse_address(toks[2])
        except AddressError as exc:
            raise p.error(str(exc)) from None
        check_address(addr)
        kind = toks[3]
        if kind == "trigger":
            if len(toks) != 4:
                raise p.error("trigger events carry no value")
            if addr.slot != "g":
                raise p.error(f"trigger must address a generator: {addr.text()}")
            return ControlEvent(t, addr, "trigger")
        if kind not in ("set", "lfo_set") or len(toks) != 5:
            raise p.error(f"bad event kind/value: {' '.join(toks[3:])!r}")
        if kind == "set" and addr.item[0] != "param":
            raise p.error(f"set must address a base param: {addr.text()}")
        if kind == "lfo_set" and addr.item[0] != "lfo":
            raise p.error(f"lfo_set must address an LFO field: {addr.text()}")
        return ControlEvent(t, addr, kind, _to_float(p, toks[4], "event value"))

    while True:
        line = p.next_line()
        if line is None:
            break
        indented = line[0] in (" ", "\t")
        toks = line.split()
        if toks[0] == "LFO":
            if indented:
                raise p.error("LFO lines cannot be indented")
            if len(toks) != 8:
                raise p.error("LFO line needs: LFO <t> <slot> <j> <rate> <depth> "
                              "<shape> <target>")
            t = _to_int(p, toks[1], "LFO track")
            if not 0 <= t < NUM_TRACKS:
                raise p.error(f"LFO track {t} out of range")
            if toks[2] not in SLOTS:
                raise p.error(f"bad LFO slot {toks[2]!r}")
            si = SLOTS.index(toks[2])
            j = _to_int(p, toks[3], "LFO index")
            if not 0 <= j <= 3:
                raise p.error(f"LFO index {j} out of range")
            rate = _to_float(p, toks[4], "LFO rate", 0.0, LFO_RATE_MAX_HZ)
            depth = _to_float(p, toks[5], "LFO depth")
            if toks[6] not in SHAPES:
                raise p.error(f"unknown LFO shape {toks[6]!r}")
            if toks[7] == "off":
                target = None
            else:
                target = _to_int(p, toks[7], "LFO target")
                if not 0 <= target < unit_arity(t, si):
                    raise p.error(f"LFO target {target} outside unit schema")
            if (t, si, j) in lfo_conf:
                raise p.error(f"duplicate LFO line for t{t}.{toks[2]}.lfo{j}")
            lfo_conf[(t, si, j)] = LfoConfig(rate, depth, toks[6], target)
        elif toks[0] == "EV" and not indented:
            ev = parse_event(toks, duration, "EV")
            if ev.time_ms < last_time:
                raise p.error("events must be sorted by time")
            last_time = ev.time_ms
            events.append(ev)
        elif toks[0] == "LOOP":
            if len(toks) != 4:
                raise p.error("LOOP line needs: LOOP <length_ms> <from_ms> <to_ms>")
            length = _to_int(p, toks[1], "loop length")
            if length <= 0:
                raise p.error("loop length must be positive")
            a = _to_int(p, toks[2], "loop start")
            b = _to_int(p, toks[3], "loop end")
            if a < 0 or b <= a:
                raise p.error(f"bad loop window [{a}, {b})")
            loop_evs: List[ControlEvent] = []
            loop_last = 0
            while True:
                sub = p.next_line()
                if sub is None:
                    break
                if sub[0] not in (" ", "\t"):
                    p.push_back()
                    break
                subtoks = sub.split()
                if subtoks[0] != "EV":
                    raise p.error("only indented EV lines may follow LOOP")
                ev = parse_event(subtoks, length, "loop EV")
                if ev.time_ms < loop_last:
                    raise p.error("loop events must be sorted by time")
                loop_last = ev.time_ms
                loop_evs.append(ev)
            loops.append((GestureLoop(tuple(loop_evs), length), (a, b)))
        elif toks[0] == "EV" and indented:
            raise p.error("indented EV outside a LOOP block")
        else:
            raise p.error(f"unexpected line {toks[0]!r}")

    tracks = []
    for gain, gen, procs in track_rows:
        ti = len(tracks)
        units = []
        for si, uc in enumerate([gen, *procs]):
            lfos = tuple(lfo_conf.get((ti, si, j), _DEFAULT_LFO) for j in range(4))
            units.append(UnitConfig(uc.unit_id, uc.params, lfos))
        tracks.append(TrackConfig(generator=units[0], processors=tuple(units[1:]),
                                  gain=gain))
    try:
        return Scorefile(sample_rate=sample_rate, seed=seed, duration_ms=duration,
                         patch=Patch(tracks=tuple(tracks), sample_rate_hint=sample_rate),
                         events=tuple(events), loops=tuple(loops),
                         title=title, author=author, version=version)
    except FmolError as exc:
        raise ParseError(p.pos, str(exc)) from None


def schedule(score: Scorefile) -> List[ControlEvent]:
    """Merge explicit events with loop expansions over [0, duration).

    Ties are broken explicit-before-loop, then by file order.
    """
    tagged = [(ev.time_ms, 0, i, ev) for i, ev in enumerate(score.events)]
    seq = 0
    for loop, (a, b) in score.loops:
        for ev in loop_events(loop, max(0, a), min(b, score.duration_ms)):
            tagged.append((ev.time_ms, 1, seq, ev))
            seq += 1
    tagged.sort(key=lambda item: (item[0], item[1], item[2]))
    return [item[3] for item in tagged]


def render_score(score: Scorefile, sample: Optional[tuple] = None) -> np.ndarray:
    """Offline render: float32 (frames, 2), frames = ceil(duration * sr / 1000).

    Bit-deterministic for a given file; events land at block boundaries.
    """
    sr = score.sample_rate
    frames = -(-score.duration_ms * sr // 1000)
    eng = make_engine(score.patch, sr, seed=score.seed, sample=sample)
    events = schedule(score)
    out = np.empty((frames, 2), dtype=np.float32)
    pos = 0
    ei = 0
    block = eng.block_size
    while pos < frames:
        while ei < len(events) and frames_for_ms(events[ei].time_ms, sr) < pos + block:
            eng.apply_event(events[ei])
            ei += 1
        buf = eng.render_block()
        n = min(block, frames - pos)
        out[pos:pos + n] = buf[:n]
        pos += n
    return out


def engine_for(score: Scorefile, **kwargs) -> Engine:
    """Engine configured exactly as render_score would build it."""
    return make_engine(score.patch, score.sample_rate, seed=score.seed, **kwargs)
