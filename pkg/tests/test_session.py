import json
import time

import pytest
from fastapi.testclient import TestClient

from fmol.service.app import build_session_app
from fmol.service.session import SessionHost


@pytest.fixture
def client():
    host = SessionHost(seed=7)
    with TestClient(build_session_app(host)) as c:
        c.host = host
        yield c


def send(ws, mtype, seq, payload=None):
    ws.send_text(json.dumps({"type": mtype, "seq": seq, "payload": payload or {}}))


def recv_until(ws, mtype, limit=500):
    """Next message of a type, skipping (but counting) everything else."""
    skipped = []
    for _ in range(limit):
        msg = json.loads(ws.receive_text())
        if msg["type"] == mtype:
            return msg, skipped
        skipped.append(msg)
    raise AssertionError(f"no {mtype} within {limit} messages")


def test_hello_acks_and_sends_state(client):
    with client.websocket_connect("/session") as ws:
        send(ws, "hello", 1)
        ack, _ = recv_until(ws, "ack")
        assert ack["seq"] == 1
        assert ack["payload"]["tracks"] == 6
        assert ack["payload"]["sample_rate"] == 44100
        state, _ = recv_until(ws, "state")
        assert "t0.g.param0" in state["payload"]["image"]
        assert state["payload"]["score"].startswith("FMOLSCORE 1\n")


def test_read_your_write(client):
    with client.websocket_connect("/session") as ws:
        send(ws, "event", 1, {"address": "t2.p1.param0", "kind": "set", "value": 0.125})
        recv_until(ws, "ack")
        send(ws, "hello", 2)
        state, _ = recv_until(ws, "state")
        assert state["payload"]["image"]["t2.p1.param0"] == 0.125


def test_trigger_makes_sound_visible_in_frames(client):
    with client.websocket_connect("/session") as ws:
        send(ws, "event", 1, {"address": "t0.g.param0", "kind": "trigger"})
        recv_until(ws, "ack")
        time.sleep(0.3)
        deadline = time.time() + 3.0
        while time.time() < deadline:
            frames, _ = recv_until(ws, "frames")
            track0 = frames["payload"]["batch"][0]
            peak = max(abs(v) for pair in track0["points"] for v in pair)
            if peak > 0.01:
                return
        raise AssertionError("no audible scope energy after trigger")


def test_malformed_messages_answered_and_connection_kept(client):
    with client.websocket_connect("/session") as ws:
        ws.send_text("this is not json")
        err, _ = recv_until(ws, "err")
        assert err["payload"]["code"] == "bad_message"
        send(ws, "warble", 5)
        err, _ = recv_until(ws, "err")
        assert err["seq"] == 5
        assert err["payload"]["code"] == "bad_type"
        send(ws, "event", 6, {"address": "t9.g.param0", "kind": "set", "value": 0.5})
        err, _ = recv_until(ws, "err")
        assert err["payload"]["code"] in ("rejected", "address")
        # still alive:
        send(ws, "hello", 7)
        ack, _ = recv_until(ws, "ack")
        assert ack["seq"] == 7


def test_event_value_out_of_range_is_error_reply(client):
    with client.websocket_connect("/session") as ws:
        send(ws, "event", 1, {"address": "t0.g.param0", "kind": "set", "value": 2.0})
        err, _ = recv_until(ws, "err")
        assert err["seq"] == 1


def test_two_clients_receive_identical_frame_sequences(client):
    with client.websocket_connect("/session") as a, \
            client.websocket_connect("/session") as b:
        seen_a, seen_b = {}, {}
        deadline = time.time() + 2.0
        while time.time() < deadline and len(set(seen_a) & set(seen_b)) < 10:
            fa, _ = recv_until(a, "frames")
            fb, _ = recv_until(b, "frames")
            for msg, store in ((fa, seen_a), (fb, seen_b)):
                idx = msg["payload"]["batch"][0]["frame_index"]
                store[idx] = json.dumps(msg["payload"])
        common = set(seen_a) & set(seen_b)
        assert len(common) >= 10
        for idx in common:
            assert seen_a[idx] == seen_b[idx]


def test_frame_indices_strictly_increase(client):
    with client.websocket_connect("/session") as ws:
        indices = []
        while len(indices) < 12:
            frames, _ = recv_until(ws, "frames")
            batch = frames["payload"]["batch"]
            assert [f["track"] for f in batch] == [0, 1, 2, 3, 4, 5]
            assert len({f["frame_index"] for f in batch}) == 1
            assert all(len(f["points"]) == 256 for f in batch)
            indices.append(batch[0]["frame_index"])
        assert all(b > a for a, b in zip(indices, indices[1:]))


def test_acks_in_order_under_quick_burst(client):
    with client.websocket_connect("/session") as ws:
        n = 200
        for i in range(n):
            send(ws, "event", i, {"address": "t0.g.param1", "kind": "set",
                                  "value": (i % 100) / 100})
        got = []
        while len(got) < n:
            msg, _ = recv_until(ws, "ack")
            got.append(msg["seq"])
        assert got == list(range(n))


def test_snapshot_take_restore_cycle(client):
    with client.websocket_connect("/session") as ws:
        send(ws, "snapshot", 1, {"action": "take", "label": "before"})
        ack, _ = recv_until(ws, "ack")
        sid = ack["payload"]["snapshot_id"]
        send(ws, "event", 2, {"address": "t1.g.param2", "kind": "set", "value": 0.05})
        recv_until(ws, "ack")
        send(ws, "snapshot", 3, {"action": "restore", "snapshot_id": sid})
        recv_until(ws, "ack")
        time.sleep(0.1)
        send(ws, "hello", 4)
        state, _ = recv_until(ws, "state")
        assert state["payload"]["image"]["t1.g.param2"] == 1.0  # back to default


def test_snapshot_restore_unknown_id_is_error(client):
    with client.websocket_connect("/session") as ws:
        send(ws, "snapshot", 1, {"action": "restore", "snapshot_id": 999})
        err, _ = recv_until(ws, "err")
        assert err["payload"]["code"] == "unknown_snapshot"


def test_loop_record_cycle(client):
    with client.websocket_connect("/session") as ws:
        send(ws, "loop", 1, {"action": "start"})
        recv_until(ws, "ack")
        send(ws, "event", 2, {"address": "t3.g.param0", "kind": "set", "value": 0.9})
        recv_until(ws, "ack")
        time.sleep(0.25)
        send(ws, "loop", 3, {"action": "stop"})
        ack, _ = recv_until(ws, "ack")
        assert ack["seq"] == 3
        assert ack["payload"]["events"] == 1
        assert ack["payload"]["length_ms"] > 0
        send(ws, "loop", 4, {"action": "cancel"})
        recv_until(ws, "ack")


def test_transport_stop_and_start(client):
    with client.websocket_connect("/session") as ws:
        send(ws, "transport", 1, {"action": "stop"})
        recv_until(ws, "ack")
        frames_before = client.host.engine.frames
        time.sleep(0.25)
        assert client.host.engine.frames <= frames_before + 64 * 3
        send(ws, "transport", 2, {"action": "start"})
        recv_until(ws, "ack")
        time.sleep(0.25)
        assert client.host.engine.frames > frames_before
