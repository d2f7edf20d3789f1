"""Command line front door.

    fmol render <in.fmol> -o <out.wav> [--sr N] [--seed N]
    fmol serve [--port N] [--patch file.fmol] [--audio-out]
    fmol catalog [--structured]
    fmol pieces serve [--port N] [--store DIR]
    fmol pieces submit <file.fmol> [--title T] [--author A] [--parent ID] [--url U]
    fmol pieces list [--offset N] [--limit N] [--author A] [--url U]
    fmol pieces get <id> [-o out.fmol] [--url U]

Exit codes: 0 ok, 1 remote/client error, 2 scorefile parse error,
3 I/O error, 4 port busy.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import socket
import sys
from pathlib import Path

import numpy as np

from . import catalog, __version__
from .errors import FmolError, ParseError
from .scorefile import parse, render_score
from .wavio import write_wav

EXIT_OK = 0
EXIT_CLIENT = 1
EXIT_PARSE = 2
EXIT_IO = 3
EXIT_PORT = 4

DEFAULT_PIECES_URL = "http://127.0.0.1:8750"


def _load_score(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_IO) from None
    try:
        return parse(text)
    except ParseError as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_PARSE) from None


def cmd_render(args) -> int:
    score = _load_score(args.input)
    if args.sr is not None or args.seed is not None:
        try:
            score = dataclasses.replace(
                score,
                sample_rate=args.sr if args.sr is not None else score.sample_rate,
                seed=args.seed if args.seed is not None else score.seed)
        except FmolError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_PARSE
    try:
        audio = render_score(score)
    except FmolError as exc:
        print(f"error: {args.input}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        write_wav(args.output, audio, score.sample_rate)
    except OSError as exc:
        print(f"error: cannot write {args.output}: {exc}", file=sys.stderr)
        return EXIT_IO
    peak = float(np.max(np.abs(audio))) if audio.size else 0.0
    peak_db = 20 * np.log10(peak) if peak > 0 else float("-inf")
    print(f"rendered {score.duration_ms} ms ({audio.shape[0]} frames) "
          f"at {score.sample_rate} Hz -> {args.output}")
    print(f"peak level {peak:.4f} ({peak_db:.1f} dBFS)")
    return EXIT_OK


def _port_free(host: str, port: int) -> bool:
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as s:
        s.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        try:
            s.bind((host, port))
        except OSError:
            return False
    return True


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import build_session_app
    from .service.session import SessionHost

    if not _port_free(args.host, args.port):
        print(f"error: port {args.port} is busy", file=sys.stderr)
        return EXIT_PORT
    if args.patch:
        host = SessionHost(score=_load_score(args.patch))
    else:
        host = SessionHost()
    if args.audio_out:
        print("note: --audio-out requested; the normative live feed is the "
              "scope stream, device output needs the optional sounddevice package")
    app = build_session_app(host)
    print(f"session host on ws://{args.host}:{args.port}/session "
          f"(sr {host.sample_rate}, seed {host.seed})")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def cmd_catalog(args) -> int:
    descs = catalog.catalog_list()
    if args.structured:
        out = [{"unit_id": d.unit_id, "kind": d.kind, "name": d.name,
                "algorithm": d.base_algorithm, "variation": d.variation,
                "params": [{"name": s.name, "lo": s.lo, "hi": s.hi,
                            "curve": s.curve, "freq_like": s.freq_like}
                           for s in d.params]}
               for d in descs]
        print(json.dumps(out, indent=2))
        return EXIT_OK
    print(f"{'id':>6}  {'kind':<10} {'variation':>9}  name / params")
    for d in descs:
        schema = ", ".join(f"{s.name}[{s.lo:g}..{s.hi:g} {s.curve}]" for s in d.params)
        print(f"{d.unit_id:>6}  {d.kind:<10} {d.variation:>9}  {d.name}  ({schema})")
    print(f"total: {len(descs)} units")
    return EXIT_OK


def cmd_pieces_serve(args) -> int:
    import uvicorn

    from .service.app import build_pieces_app
    from .service.pieces import PieceStore

    if not _port_free(args.host, args.port):
        print(f"error: port {args.port} is busy", file=sys.stderr)
        return EXIT_PORT
    app = build_pieces_app(PieceStore(Path(args.store)))
    print(f"piece database on http://{args.host}:{args.port} (store: {args.store})")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def _pieces_client(url: str):
    import httpx
    return httpx.Client(base_url=url, timeout=30.0)


def cmd_pieces_submit(args) -> int:
    _load_score(args.input)  # fail fast locally with a line-numbered message
    body = Path(args.input).read_text()
    with _pieces_client(args.url) as client:
        r = client.post("/pieces", json={
            "title": args.title, "author": args.author,
            "parent_id": args.parent, "body": body})
    if r.status_code != 201:
        print(f"error: server rejected piece: {r.status_code} {r.text}",
              file=sys.stderr)
        return EXIT_CLIENT
    rec = r.json()
    print(f"submitted piece id {rec['id']} ({rec['size']} bytes, "
          f"sha256 {rec['body_hash'][:12]}...)")
    return EXIT_OK


def cmd_pieces_list(args) -> int:
    params = {"offset": args.offset, "limit": args.limit}
    if args.author:
        params["author"] = args.author
    with _pieces_client(args.url) as client:
        r = client.get("/pieces", params=params)
    if r.status_code != 200:
        print(f"error: {r.status_code} {r.text}", file=sys.stderr)
        return EXIT_CLIENT
    page = r.json()
    for rec in page["pieces"]:
        print(f"{rec['id']:>6}  {rec['submitted_at']}  "
              f"{rec['author'] or '-':<20} {rec['title']}")
    print(f"total: {page['total']}")
    return EXIT_OK


def cmd_pieces_get(args) -> int:
    with _pieces_client(args.url) as client:
        r = client.get(f"/pieces/{args.id}")
    if r.status_code != 200:
        print(f"error: {r.status_code} {r.text}", file=sys.stderr)
        return EXIT_CLIENT
    rec = r.json()
    if args.output:
        Path(args.output).write_text(rec["body"])
        print(f"wrote piece {rec['id']} to {args.output}")
    else:
        sys.stdout.write(rec["body"])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fmol", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--version", action="version", version=f"fmol {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("render", help="render a scorefile to a WAV file")
    r.add_argument("input")
    r.add_argument("-o", "--output", required=True)
    r.add_argument("--sr", type=int, default=None)
    r.add_argument("--seed", type=int, default=None)
    r.set_defaults(func=cmd_render)

    s = sub.add_parser("serve", help="host a live session over WebSocket")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8740)
    s.add_argument("--patch", default=None,
                   help="scorefile whose patch/seed configure the session")
    s.add_argument("--audio-out", action="store_true")
    s.set_defaults(func=cmd_serve)

    c = sub.add_parser("catalog", help="list every unit in the catalog")
    c.add_argument("--structured", action="store_true", help="JSON output")
    c.set_defaults(func=cmd_catalog)

    p = sub.add_parser("pieces", help="piece database service and client")
    psub = p.add_subparsers(dest="pieces_command", required=True)

    ps = psub.add_parser("serve", help="host the piece database")
    ps.add_argument("--host", default="127.0.0.1")
    ps.add_argument("--port", type=int, default=8750)
    ps.add_argument("--store", default="./piece-store")
    ps.set_defaults(func=cmd_pieces_serve)

    pu = psub.add_parser("submit", help="submit a scorefile")
    pu.add_argument("input")
    pu.add_argument("--title", default="")
    pu.add_argument("--author", default="")
    pu.add_argument("--parent", type=int, default=None)
    pu.add_argument("--url", default=DEFAULT_PIECES_URL)
    pu.set_defaults(func=cmd_pieces_submit)

    pl = psub.add_parser("list", help="list stored pieces")
    pl.add_argument("--offset", type=int, default=0)
    pl.add_argument("--limit", type=int, default=50)
    pl.add_argument("--author", default=None)
    pl.add_argument("--url", default=DEFAULT_PIECES_URL)
    pl.set_defaults(func=cmd_pieces_list)

    pg = psub.add_parser("get", help="fetch one piece")
    pg.add_argument("id", type=int)
    pg.add_argument("-o", "--output", default=None)
    pg.add_argument("--url", default=DEFAULT_PIECES_URL)
    pg.set_defaults(func=cmd_pieces_get)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_CLIENT
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
