"""Pydantic request/response models for both services.

The WebSocket session protocol and the piece API responses are documented
in docs/session-protocol.md; field names here are the normative ones.
"""

from __future__ import annotations

from typing import Any, List, Optional

from pydantic import BaseModel, Field

CLIENT_MESSAGE_TYPES = ("event", "snapshot", "loop", "transport", "hello")
HOST_MESSAGE_TYPES = ("frames", "state", "ack", "err")


class Envelope(BaseModel):
    """Every session wire message, both directions: {type, seq, payload}."""

    type: str
    seq: int
    payload: dict = Field(default_factory=dict)


class EventPayload(BaseModel):
    """payload of a client 'event' message."""

    address: str
    kind: str
    value: Optional[float] = None


class SubmitRequest(BaseModel):
    title: str = ""
    author: str = ""
    parent_id: Optional[int] = None
    body: str


class PieceSummary(BaseModel):
    id: int
    title: str
    author: str
    submitted_at: str
    parent_id: Optional[int] = None
    body_hash: str
    size: int


class PieceResponse(PieceSummary):
    body: str


class PieceList(BaseModel):
    total: int
    offset: int
    limit: int
    pieces: List[PieceSummary]


class ErrorBody(BaseModel):
    code: str
    message: str
    line: Optional[int] = None
