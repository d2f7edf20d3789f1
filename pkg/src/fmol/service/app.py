"""FastAPI application factories for the two services."""

from __future__ import annotations

from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import FastAPI

from . import pieces as pieces_mod
from . import session as session_mod
from .pieces import PieceRejected, PieceStore
from .session import SessionHost


def build_pieces_app(store: PieceStore) -> FastAPI:
    app = FastAPI(title="fmol piece database", version="0.1.0")
    app.state.store = store
    app.include_router(pieces_mod.build_router(store))
    app.add_exception_handler(PieceRejected, pieces_mod.rejection_handler)
    return app


def build_session_app(host: SessionHost) -> FastAPI:
    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        host.start()
        try:
            yield
        finally:
            host.stop()

    app = FastAPI(title="fmol live session", version="0.1.0", lifespan=lifespan)
    app.state.host = host
    app.include_router(session_mod.build_router(host))
    return app


def pieces_app_from_path(root: str | Path) -> FastAPI:
    return build_pieces_app(PieceStore(Path(root)))
