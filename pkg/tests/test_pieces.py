import random
import threading

import pytest
from fastapi.testclient import TestClient

from fmol.data import demo_score_text
from fmol.scorefile import parse, serialize
from fmol.service.app import build_pieces_app
from fmol.service.pieces import PieceRejected, PieceStore
from helpers import random_scorefile

MINIMAL = None


def minimal_body():
    global MINIMAL
    if MINIMAL is None:
        rnd = random.Random(1)
        MINIMAL = serialize(random_scorefile(rnd, max_events=0, max_loops=0))
    return MINIMAL


@pytest.fixture
def store(tmp_path):
    return PieceStore(tmp_path / "store")


@pytest.fixture
def client(store):
    with TestClient(build_pieces_app(store)) as c:
        yield c


# -- store behavior ------------------------------------------------------------

def test_first_id_is_one(store):
    rec = store.submit("t", "a", None, minimal_body())
    assert rec.id == 1


def test_ids_strictly_increase(store):
    ids = [store.submit("", "", None, minimal_body()).id for _ in range(5)]
    assert ids == [1, 2, 3, 4, 5]


def test_garbage_body_rejected_with_line(store):
    with pytest.raises(PieceRejected) as exc:
        store.submit("x", "y", None, "garbage")
    assert exc.value.code == "invalid_scorefile"
    assert exc.value.line == 1


def test_duplicate_body_new_record_same_hash(store):
    a = store.submit("one", "x", None, minimal_body())
    b = store.submit("two", "x", None, minimal_body())
    assert a.id != b.id
    assert a.body_hash == b.body_hash


def test_unknown_parent_rejected(store):
    with pytest.raises(PieceRejected) as exc:
        store.submit("", "", 42, minimal_body())
    assert exc.value.code == "unknown_parent"


def test_parent_lineage_resolvable(store):
    a = store.submit("root", "x", None, minimal_body())
    b = store.submit("child", "x", a.id, minimal_body())
    assert store.find(b.id).parent_id == a.id


def test_oversize_rejected(store):
    big = minimal_body() + "#" + "x" * (256 * 1024)
    with pytest.raises(PieceRejected) as exc:
        store.submit("", "", None, big)
    assert exc.value.status == 413


def test_body_stored_canonically(store):
    text = minimal_body()
    messy = "# leading comment\n\n" + text
    rec = store.submit("", "", None, messy)
    assert store.body(rec.id) == serialize(parse(text))


def test_restart_durability(tmp_path):
    root = tmp_path / "s"
    s1 = PieceStore(root)
    r1 = s1.submit("kept", "auth", None, minimal_body())
    s2 = PieceStore(root)
    assert s2.find(r1.id).title == "kept"
    assert s2.body(r1.id) == s1.body(r1.id)
    r2 = s2.submit("later", "auth", None, minimal_body())
    assert r2.id == r1.id + 1  # counter survives restarts: no id reuse


def test_concurrent_submissions_distinct_ids(store):
    ids = []
    lock = threading.Lock()

    def worker():
        rec = store.submit("", "w", None, minimal_body())
        with lock:
            ids.append(rec.id)

    threads = [threading.Thread(target=worker) for _ in range(32)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(ids) == 32
    assert len(set(ids)) == 32


def test_pagination_and_author_filter(store):
    for i in range(7):
        store.submit(f"p{i}", "alice" if i % 2 == 0 else "bob", None, minimal_body())
    total, rows = store.list(offset=1, limit=1)
    assert total == 7
    assert [r.id for r in rows] == [2]
    total, rows = store.list(author="alice", limit=100)
    assert total == 4
    assert all(r.author == "alice" for r in rows)
    total, rows = store.list(offset=100, limit=10)
    assert total == 7 and rows == []


def test_limit_above_500_rejected(store):
    with pytest.raises(PieceRejected):
        store.list(limit=501)


# -- HTTP surface ---------------------------------------------------------------

def test_http_submit_and_get_roundtrip(client):
    r = client.post("/pieces", json={"title": "demo", "author": "me",
                                     "body": demo_score_text()})
    assert r.status_code == 201
    rec = r.json()
    assert rec["id"] == 1
    assert rec["body"] == serialize(parse(demo_score_text()))
    r2 = client.get(f"/pieces/{rec['id']}")
    assert r2.status_code == 200
    assert r2.json()["body"] == rec["body"]


def test_http_listing_excludes_body(client):
    client.post("/pieces", json={"body": minimal_body()})
    r = client.get("/pieces")
    assert r.status_code == 200
    page = r.json()
    assert page["total"] == 1
    assert "body" not in page["pieces"][0]


def test_http_parse_error_shape(client):
    r = client.post("/pieces", json={"body": "FMOLSCORE 1\nbroken"})
    assert r.status_code == 422
    err = r.json()
    assert err["code"] == "invalid_scorefile"
    assert isinstance(err["line"], int)
    assert "message" in err


def test_http_404_shape(client):
    r = client.get("/pieces/999")
    assert r.status_code == 404
    assert r.json()["code"] == "not_found"


def test_http_get_zero_on_empty_store(client):
    assert client.get("/pieces/0").status_code == 404
    page = client.get("/pieces").json()
    assert page["total"] == 0 and page["pieces"] == []


def test_http_health(client):
    r = client.get("/health")
    assert r.status_code == 200
    assert r.json()["status"] == "ok"
