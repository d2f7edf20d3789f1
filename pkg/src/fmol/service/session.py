"""Live session host: one real-time engine, many equal WebSocket performers.

A single render-clock thread owns the engine.  Client messages funnel
through one bounded FIFO queue and are drained at block boundaries, so
events apply in arrival order; scope-frame batches fan out to every client
without blocking the clock.  All clients see identical batches.
"""

from __future__ import annotations

import asyncio
import json
import queue
import threading
import time
from concurrent.futures import Future
from typing import Dict, List, Optional

import numpy as np
from fastapi import APIRouter, WebSocket, WebSocketDisconnect
from pydantic import ValidationError

from ..address import parse_address
from ..engine import Engine, make_engine
from ..errors import FmolError
from ..events import ControlEvent
from ..gestures import Snapshot, loop_events, loop_record, snapshot_restore
from ..patch import Patch, default_patch
from ..scope import SCOPE_POINTS, scope_decimate
from ..scorefile import Scorefile, serialize
from .schemas import CLIENT_MESSAGE_TYPES, Envelope, EventPayload

CONTROL_QUEUE_SIZE = 4096
FRAME_QUEUE_SIZE = 64
BATCHES_PER_SECOND = 35  # comfortably above the 30/s contract


class SessionError(Exception):
    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(message)


class _Client:
    """Per-connection outgoing buffers; frames drop oldest under pressure."""

    def __init__(self, loop: asyncio.AbstractEventLoop):
        self.loop = loop
        self.ctrl: asyncio.Queue = asyncio.Queue()
        self.frames: asyncio.Queue = asyncio.Queue(maxsize=FRAME_QUEUE_SIZE)
        self.wake = asyncio.Event()

    def send_ctrl(self, text: str) -> None:
        self.ctrl.put_nowait(text)
        self.wake.set()

    def offer_frames(self, text: str) -> None:
        try:
            self.frames.put_nowait(text)
        except asyncio.QueueFull:
            try:
                self.frames.get_nowait()  # latest wins
            except asyncio.QueueEmpty:
                pass
            self.frames.put_nowait(text)
        self.wake.set()


class SessionHost:
    """Owns the engine and its render clock; thread-safe control inlets."""

    def __init__(self, patch: Optional[Patch] = None, sample_rate: int = 44100,
                 seed: int = 0, score: Optional[Scorefile] = None):
        if score is not None:
            patch = score.patch
            sample_rate = score.sample_rate
            seed = score.seed
        self.patch = patch if patch is not None else default_patch()
        self.sample_rate = sample_rate
        self.seed = seed
        self.engine: Engine = make_engine(self.patch, sample_rate, seed=seed)
        self.inbox: queue.Queue = queue.Queue(maxsize=CONTROL_QUEUE_SIZE)
        self.clients: Dict[int, _Client] = {}
        self._clients_lock = threading.Lock()
        self._client_seq = 0
        self._host_seq = 0
        self._thread: Optional[threading.Thread] = None
        self._running = False
        self._transport_on = True
        self.batch_index = 0
        self._scope_chunks: List[List[np.ndarray]] = [[] for _ in range(6)]
        self._scope_frames = 0
        self._frames_per_batch = sample_rate // BATCHES_PER_SECOND
        self.snapshots: Dict[int, dict] = {}
        self._snapshot_seq = 0
        self.active_loop: Optional[tuple] = None  # (GestureLoop, anchor_ms)
        self._recording: Optional[tuple] = None   # (start_ms, [events])

    # -- client registry ----------------------------------------------------

    def attach(self, loop: asyncio.AbstractEventLoop) -> tuple[int, _Client]:
        client = _Client(loop)
        with self._clients_lock:
            self._client_seq += 1
            cid = self._client_seq
            self.clients[cid] = client
        return cid, client

    def detach(self, cid: int) -> None:
        with self._clients_lock:
            self.clients.pop(cid, None)

    # -- control inlets (any thread) -----------------------------------------

    def post(self, item: tuple) -> None:
        try:
            self.inbox.put_nowait(item)
        except queue.Full:
            raise SessionError("overflow", "control queue full, event dropped") \
                from None

    def request_state(self) -> dict:
        """Engine image + canonical score text, consistent with every event
        posted before this call (the request rides the same queue)."""
        fut: Future = Future()
        self.post(("state", fut))
        return fut.result(timeout=5.0)

    def take_snapshot(self, label: str = "") -> int:
        self._snapshot_seq += 1
        sid = self._snapshot_seq
        self.post(("snapshot_take", sid, label))
        return sid

    # -- render clock ----------------------------------------------------------

    def start(self) -> None:
        if self._running:
            return
        self._running = True
        self._thread = threading.Thread(target=self._run, daemon=True,
                                        name="fmol-render-clock")
        self._thread.start()

    def stop(self) -> None:
        self._running = False
        if self._thread is not None:
            self._thread.join(timeout=2.0)
            self._thread = None

    def _now_ms(self) -> int:
        return self.engine.frames * 1000 // self.sample_rate

    def _drain_inbox(self) -> None:
        while True:
            try:
                item = self.inbox.get_nowait()
            except queue.Empty:
                return
            kind = item[0]
            if kind == "event":
                ev: ControlEvent = item[1]
                try:
                    self.engine.apply_event(ev)
                except FmolError:
                    continue  # validated at the rim; never kill the clock
                if self._recording is not None:
                    self._recording[1].append(ev.shifted(self._now_ms() - ev.time_ms))
            elif kind == "state":
                image = self.engine.param_image()
                score = Scorefile(sample_rate=self.sample_rate, seed=self.seed,
                                  duration_ms=1, patch=self.engine.current_patch())
                item[1].set_result({"image": image, "score": serialize(score),
                                    "frames": self.engine.frames})
            elif kind == "snapshot_take":
                self.snapshots[item[1]] = self.engine.param_image()
            elif kind == "snapshot_restore":
                snap = self.snapshots.get(item[1])
                if snap is not None:
                    evs = snapshot_restore(Snapshot(image=snap),
                                           self.engine.param_image())
                    for ev in evs:
                        self.engine.apply_event(ev)
            elif kind == "loop_start":
                self._recording = (self._now_ms(), [])
            elif kind == "loop_stop":
                fut = item[1]
                if self._recording is None:
                    fut.set_result(None)
                else:
                    start, captured = self._recording
                    self._recording = None
                    now = max(self._now_ms(), start + 1)
                    loop = loop_record(start, now, captured)
                    self.active_loop = (loop, now)
                    fut.set_result({"length_ms": loop.length_ms,
                                    "events": len(loop.events)})
            elif kind == "loop_cancel":
                self._recording = None
                self.active_loop = None
            elif kind == "transport":
                action = item[1]
                if action == "stop":
                    self._transport_on = False
                elif action == "start":
                    self._transport_on = True
                elif action == "reset":
                    self.engine = make_engine(self.patch, self.sample_rate,
                                              seed=self.seed)

    def _apply_loop_for_block(self) -> None:
        if self.active_loop is None:
            return
        loop, anchor = self.active_loop
        a = self._now_ms()
        b = (self.engine.frames + self.engine.block_size) * 1000 // self.sample_rate
        if b <= a:
            b = a + 1
        for ev in loop_events(loop, max(0, a - anchor), max(0, b - anchor)):
            try:
                self.engine.apply_event(ev)
            except FmolError:
                continue

    def _render_one_block(self) -> None:
        self._drain_inbox()
        self._apply_loop_for_block()
        self.engine.render_block()
        for ti in range(6):
            self._scope_chunks[ti].append(self.engine.last_tracks[ti])
        self._scope_frames += self.engine.block_size
        if self._scope_frames >= self._frames_per_batch:
            self._emit_batch()

    def _emit_batch(self) -> None:
        self.batch_index += 1
        with self._clients_lock:
            targets = list(self.clients.values())
        if targets:
            batch = []
            for ti in range(6):
                run = np.concatenate(self._scope_chunks[ti])
                pts = scope_decimate(run, SCOPE_POINTS)
                batch.append({"track": ti, "frame_index": self.batch_index,
                              "points": [[round(float(a), 5), round(float(b), 5)]
                                         for a, b in pts]})
            self._host_seq += 1
            text = json.dumps({"type": "frames", "seq": self._host_seq,
                               "payload": {"batch": batch}})
            for client in targets:
                client.loop.call_soon_threadsafe(client.offer_frames, text)
        self._scope_chunks = [[] for _ in range(6)]
        self._scope_frames = 0

    def _run(self) -> None:
        sr = self.sample_rate
        block = self.engine.block_size
        t0 = time.perf_counter()
        rendered = 0
        while self._running:
            if not self._transport_on:
                self._drain_inbox()  # stay responsive while stopped
                time.sleep(0.005)
                t0 = time.perf_counter() - rendered / sr
                continue
            target = int((time.perf_counter() - t0) * sr)
            if target > rendered + sr // 2:  # cap catch-up after a stall
                t0 = time.perf_counter() - (rendered + sr // 10) / sr
                target = rendered + sr // 10
            while rendered < target and self._running:
                self._render_one_block()
                rendered += block
            time.sleep(block / sr / 2)


# -- websocket protocol ---------------------------------------------------------


def _ack(seq: int, extra: Optional[dict] = None) -> str:
    return json.dumps({"type": "ack", "seq": seq, "payload": extra or {}})


def _err(seq: int, code: str, message: str) -> str:
    return json.dumps({"type": "err", "seq": seq,
                       "payload": {"code": code, "message": message}})


def _handle_message(host: SessionHost, env: Envelope) -> List[str]:
    """Process one client message; returns the ordered replies."""
    if env.type == "hello":
        state = host.request_state()
        replies = [_ack(env.seq, {"sample_rate": host.sample_rate,
                                  "block_size": host.engine.block_size,
                                  "tracks": 6, "scope_points": SCOPE_POINTS})]
        replies.append(json.dumps({"type": "state", "seq": env.seq,
                                   "payload": state}))
        return replies
    if env.type == "event":
        body = EventPayload(**env.payload)
        address = parse_address(body.address)
        ev = ControlEvent(0, address, body.kind, body.value)
        # chain topology is immutable after start, so this read is safe here
        slot = host.engine._slot(address)
        if address.item[0] == "param" and address.item[1] >= len(slot.base):
            raise SessionError("address", f"param out of range: {body.address}")
        if ev.kind == "trigger" and address.slot != "g":
            raise SessionError("address", "trigger must target a generator")
        host.post(("event", ev))
        return [_ack(env.seq)]
    if env.type == "snapshot":
        action = env.payload.get("action")
        if action == "take":
            sid = host.take_snapshot(env.payload.get("label", ""))
            return [_ack(env.seq, {"snapshot_id": sid})]
        if action == "restore":
            sid = env.payload.get("snapshot_id")
            if sid not in host.snapshots:
                raise SessionError("unknown_snapshot", f"no snapshot {sid}")
            host.post(("snapshot_restore", sid))
            return [_ack(env.seq)]
        raise SessionError("bad_action", f"snapshot action {action!r}")
    if env.type == "loop":
        action = env.payload.get("action")
        if action == "start":
            host.post(("loop_start",))
            return [_ack(env.seq)]
        if action == "stop":
            fut: Future = Future()
            host.post(("loop_stop", fut))
            info = fut.result(timeout=5.0)
            if info is None:
                raise SessionError("no_recording", "loop stop without start")
            return [_ack(env.seq, info)]
        if action == "cancel":
            host.post(("loop_cancel",))
            return [_ack(env.seq)]
        raise SessionError("bad_action", f"loop action {action!r}")
    if env.type == "transport":
        action = env.payload.get("action")
        if action not in ("start", "stop", "reset"):
            raise SessionError("bad_action", f"transport action {action!r}")
        host.post(("transport", action))
        return [_ack(env.seq)]
    raise SessionError("bad_type", f"unknown message type {env.type!r}")


def build_router(host: SessionHost) -> APIRouter:
    router = APIRouter()

    @router.get("/health")
    def health():
        return {"status": "ok", "frames": host.engine.frames,
                "clients": len(host.clients)}

    @router.websocket("/session")
    async def session_ws(ws: WebSocket):
        await ws.accept()
        cid, client = host.attach(asyncio.get_running_loop())

        async def sender():
            while True:
                if not client.ctrl.empty():
                    await ws.send_text(client.ctrl.get_nowait())
                    continue
                if not client.frames.empty():
                    await ws.send_text(client.frames.get_nowait())
                    continue
                client.wake.clear()
                if client.ctrl.empty() and client.frames.empty():
                    await client.wake.wait()

        send_task = asyncio.create_task(sender())
        try:
            while True:
                raw = await ws.receive_text()
                seq = -1
                try:
                    data = json.loads(raw)
                    seq = data.get("seq", -1) if isinstance(data, dict) else -1
                    env = Envelope(**data)
                    if env.type not in CLIENT_MESSAGE_TYPES:
                        raise SessionError("bad_type",
                                           f"unknown message type {env.type!r}")
                    for reply in _handle_message(host, env):
                        client.send_ctrl(reply)
                except SessionError as exc:
                    client.send_ctrl(_err(seq, exc.code, str(exc)))
                except (json.JSONDecodeError, ValidationError, TypeError) as exc:
                    client.send_ctrl(_err(seq, "bad_message", str(exc)[:200]))
                except FmolError as exc:
                    client.send_ctrl(_err(seq, "rejected", str(exc)))
        except WebSocketDisconnect:
            pass
        finally:
            send_task.cancel()
            host.detach(cid)

    return router
