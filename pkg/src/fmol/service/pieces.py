"""Piece database: validated, immutable, file-backed compositions.

Bodies live one-per-file named by id; a single JSON index (ids, metadata,
the id counter) is rewritten atomically at each commit.  Records never
change after creation and ids strictly increase, surviving restarts.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import List, Optional, Tuple

from fastapi import APIRouter, Request
from fastapi.responses import JSONResponse

from ..errors import ParseError
from ..scorefile import parse, serialize
from .schemas import PieceList, PieceResponse, PieceSummary, SubmitRequest

MAX_BODY_BYTES = 256 * 1024
MAX_META_BYTES = 256
MAX_PAGE_LIMIT = 500


class PieceRejected(Exception):
    def __init__(self, status: int, code: str, message: str,
                 line: Optional[int] = None):
        self.status = status
        self.code = code
        self.message = message
        self.line = line
        super().__init__(message)


@dataclass(frozen=True)
class PieceRecord:
    id: int
    title: str
    author: str
    submitted_at: str
    parent_id: Optional[int]
    body_hash: str
    size: int

    def summary(self) -> dict:
        return asdict(self)


class PieceStore:
    """Append-only store: concurrent readers, single commit lock for writers."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.pieces_dir = self.root / "pieces"
        self.index_path = self.root / "index.json"
        self.pieces_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._records: List[PieceRecord] = []
        self._next_id = 1
        if self.index_path.exists():
            data = json.loads(self.index_path.read_text())
            self._next_id = data["next_id"]
            self._records = [PieceRecord(**r) for r in data["records"]]

    def _write_index(self) -> None:
        tmp = self.index_path.with_suffix(".tmp")
        payload = {"next_id": self._next_id,
                   "records": [r.summary() for r in self._records]}
        tmp.write_text(json.dumps(payload, indent=0))
        os.replace(tmp, self.index_path)

    def _body_path(self, piece_id: int) -> Path:
        return self.pieces_dir / f"{piece_id}.fmol"

    def submit(self, title: str, author: str, parent_id: Optional[int],
               body: str) -> PieceRecord:
        if len(body.encode()) > MAX_BODY_BYTES:
            raise PieceRejected(413, "too_large",
                                f"body exceeds {MAX_BODY_BYTES} bytes")
        for name, value in (("title", title), ("author", author)):
            if len(value.encode()) > MAX_META_BYTES:
                raise PieceRejected(422, "bad_meta",
                                    f"{name} exceeds {MAX_META_BYTES} bytes")
        try:
            score = parse(body)
        except ParseError as exc:
            raise PieceRejected(422, "invalid_scorefile", exc.message,
                                line=exc.line) from None
        canonical = serialize(score)
        digest = hashlib.sha256(canonical.encode()).hexdigest()
        with self._lock:
            if parent_id is not None and self.find(parent_id) is None:
                raise PieceRejected(422, "unknown_parent",
                                    f"parent piece {parent_id} does not exist")
            record = PieceRecord(
                id=self._next_id, title=title, author=author,
                submitted_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
                parent_id=parent_id, body_hash=digest,
                size=len(canonical.encode()))
            tmp = self._body_path(record.id).with_suffix(".tmp")
            tmp.write_text(canonical)
            os.replace(tmp, self._body_path(record.id))
            self._next_id += 1
            self._records.append(record)
            self._write_index()
        return record

    def find(self, piece_id: int) -> Optional[PieceRecord]:
        for r in self._records:
            if r.id == piece_id:
                return r
        return None

    def list(self, offset: int = 0, limit: int = 50,
             author: Optional[str] = None) -> Tuple[int, List[PieceRecord]]:
        if limit > MAX_PAGE_LIMIT:
            raise PieceRejected(422, "bad_page",
                                f"limit exceeds {MAX_PAGE_LIMIT}")
        if limit < 0 or offset < 0:
            raise PieceRejected(422, "bad_page", "offset/limit must be >= 0")
        rows = self._records if author is None else \
            [r for r in self._records if r.author == author]
        return len(rows), rows[offset:offset + limit]

    def body(self, piece_id: int) -> str:
        return self._body_path(piece_id).read_text()


def build_router(store: PieceStore) -> APIRouter:
    router = APIRouter()

    @router.get("/health")
    def health():
        return {"status": "ok", "pieces": len(store._records)}

    @router.post("/pieces", response_model=PieceResponse, status_code=201)
    def submit_piece(req: SubmitRequest):
        record = store.submit(req.title, req.author, req.parent_id, req.body)
        return PieceResponse(**record.summary(), body=store.body(record.id))

    @router.get("/pieces", response_model=PieceList)
    def list_pieces(offset: int = 0, limit: int = 50,
                    author: Optional[str] = None):
        total, rows = store.list(offset, limit, author)
        return PieceList(total=total, offset=offset, limit=limit,
                         pieces=[PieceSummary(**r.summary()) for r in rows])

    @router.get("/pieces/{piece_id}", response_model=PieceResponse)
    def get_piece(piece_id: int):
        record = store.find(piece_id)
        if record is None:
            raise PieceRejected(404, "not_found", f"no piece with id {piece_id}")
        return PieceResponse(**record.summary(), body=store.body(piece_id))

    return router


async def rejection_handler(_request: Request, exc: PieceRejected) -> JSONResponse:
    body = {"code": exc.code, "message": exc.message}
    if exc.line is not None:
        body["line"] = exc.line
    return JSONResponse(status_code=exc.status, content=body)
