import json
import socket
import wave

from fmol import catalog
from fmol.cli import main
from fmol.data import demo_score_path


def test_render_demo_writes_wav(tmp_path, capsys):
    out = tmp_path / "demo.wav"
    code = main(["render", str(demo_score_path()), "-o", str(out)])
    assert code == 0
    printed = capsys.readouterr().out
    assert "12000 ms" in printed
    assert "peak level" in printed
    with wave.open(str(out), "rb") as w:
        assert w.getnchannels() == 2
        assert w.getframerate() == 44100
        assert w.getnframes() == 12000 * 44100 // 1000


def test_render_twice_byte_identical(tmp_path):
    a, b = tmp_path / "a.wav", tmp_path / "b.wav"
    assert main(["render", str(demo_score_path()), "-o", str(a)]) == 0
    assert main(["render", str(demo_score_path()), "-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_render_seed_override_changes_noise(tmp_path):
    a, b = tmp_path / "a.wav", tmp_path / "b.wav"
    assert main(["render", str(demo_score_path()), "-o", str(a), "--seed", "1"]) == 0
    assert main(["render", str(demo_score_path()), "-o", str(b), "--seed", "2"]) == 0
    assert a.read_bytes() != b.read_bytes()


def test_render_malformed_exits_2_with_line(tmp_path, capsys):
    bad = tmp_path / "bad.fmol"
    bad.write_text("FMOLSCORE 1\nSR 44100\nSEED 0\nDUR broken\n")
    code = main(["render", str(bad), "-o", str(tmp_path / "x.wav")])
    assert code == 2
    err = capsys.readouterr().err
    assert "line 4" in err


def test_render_missing_input_exits_3(tmp_path, capsys):
    code = main(["render", str(tmp_path / "nope.fmol"), "-o", str(tmp_path / "x.wav")])
    assert code == 3


def test_render_unwritable_output_exits_3(tmp_path, capsys):
    code = main(["render", str(demo_score_path()), "-o",
                 str(tmp_path / "nodir" / "x.wav")])
    assert code == 3


def test_catalog_listing(capsys):
    assert main(["catalog"]) == 0
    lines = capsys.readouterr().out.strip().split("\n")
    data_rows = [l for l in lines if l.strip() and l.strip()[0].isdigit()]
    assert len(data_rows) >= 100
    ids = [int(r.split()[0]) for r in data_rows]
    assert ids == sorted(ids)


def test_catalog_structured_matches_catalog_list(capsys):
    assert main(["catalog", "--structured"]) == 0
    data = json.loads(capsys.readouterr().out)
    descs = catalog.catalog_list()
    assert len(data) == len(descs)
    for row, d in zip(data, descs):
        assert row["unit_id"] == d.unit_id
        assert row["name"] == d.name
        assert row["kind"] == d.kind
        assert len(row["params"]) == len(d.params)


def test_serve_port_busy_exits_4(capsys):
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as s:
        s.bind(("127.0.0.1", 0))
        s.listen(1)
        port = s.getsockname()[1]
        code = main(["serve", "--port", str(port)])
    assert code == 4
    assert "busy" in capsys.readouterr().err


def test_pieces_serve_port_busy_exits_4(tmp_path, capsys):
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as s:
        s.bind(("127.0.0.1", 0))
        s.listen(1)
        port = s.getsockname()[1]
        code = main(["pieces", "serve", "--port", str(port),
                     "--store", str(tmp_path)])
    assert code == 4
