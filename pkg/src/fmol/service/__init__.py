"""FastAPI services: the live session host and the piece database."""

from .app import build_pieces_app, build_session_app
from .pieces import PieceStore
from .session import SessionHost

__all__ = ["PieceStore", "SessionHost", "build_pieces_app", "build_session_app"]
