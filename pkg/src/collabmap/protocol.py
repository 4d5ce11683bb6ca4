"""Wire message schema: one JSON document per transport frame.

Client messages: hello, submit_op, presence, speaking, ping.
Server messages: welcome, op_accepted, op_rejected, op_broadcast,
presence, score_update, badge_change, pong, error.

Every submit_op is answered by exactly one op_accepted or op_rejected, and
accepted ops are echoed to all room members (submitter included) as
op_broadcast in server_seq order. See docs/protocol.md for examples.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .geometry import Rect, Vec2
from .model import UserId
from .ops import (
    Operation,
    WireError,
    ensure_encodable,
    op_from_wire,
    op_to_wire,
    rect_from_wire,
    rect_to_wire,
    vec_from_wire,
    vec_to_wire,
)


@dataclass
class PresenceState:
    """Ephemeral per-user state; broadcast, never folded into the document."""

    user: UserId
    name: str
    color: int
    cursor: Vec2
    viewport: Rect
    holding: str | None = None
    speaking: bool = False
    last_heard: int = 0

    def to_wire(self) -> dict:
        return {
            "user": self.user,
            "name": self.name,
            "color": self.color,
            "cursor": vec_to_wire(self.cursor),
            "viewport": rect_to_wire(self.viewport),
            "holding": self.holding,
            "speaking": self.speaking,
            "last_heard": self.last_heard,
        }


# -- client -> server ------------------------------------------------------


@dataclass(frozen=True)
class Hello:
    room: str
    name: str
    resume_from_seq: int | None = None


@dataclass(frozen=True)
class SubmitOp:
    op: Operation


@dataclass(frozen=True)
class PresenceUpdate:
    cursor: Vec2
    viewport: Rect
    holding: str | None = None


@dataclass(frozen=True)
class Speaking:
    on: bool


@dataclass(frozen=True)
class Ping:
    pass


ClientMessage = Any  # Hello | SubmitOp | PresenceUpdate | Speaking | Ping


def client_message_from_wire(doc: Any) -> ClientMessage:
    if not isinstance(doc, dict):
        raise WireError("message must be an object")
    kind = doc.get("type")
    if kind == "hello":
        room = doc.get("room")
        name = doc.get("name")
        if not isinstance(room, str) or not room or not isinstance(name, str) or not name:
            raise WireError("hello requires non-empty room and name")
        ensure_encodable(name)
        resume = doc.get("resume_from_seq")
        if resume is not None and (not isinstance(resume, int) or isinstance(resume, bool) or resume < 0):
            raise WireError(f"bad resume_from_seq {resume!r}")
        return Hello(room, name, resume)
    if kind == "submit_op":
        return SubmitOp(op_from_wire(doc.get("op")))
    if kind == "presence":
        holding = doc.get("holding")
        if holding is not None and not isinstance(holding, str):
            raise WireError(f"bad holding {holding!r}")
        return PresenceUpdate(
            cursor=vec_from_wire(doc.get("cursor")),
            viewport=rect_from_wire(doc.get("viewport")),
            holding=holding,
        )
    if kind == "speaking":
        on = doc.get("on")
        if not isinstance(on, bool):
            raise WireError(f"bad speaking flag {on!r}")
        return Speaking(on)
    if kind == "ping":
        return Ping()
    raise WireError(f"unknown client message type {kind!r}")


def client_message_to_wire(msg: ClientMessage) -> dict:
    if isinstance(msg, Hello):
        return {"type": "hello", "room": msg.room, "name": msg.name, "resume_from_seq": msg.resume_from_seq}
    if isinstance(msg, SubmitOp):
        return {"type": "submit_op", "op": op_to_wire(msg.op)}
    if isinstance(msg, PresenceUpdate):
        return {
            "type": "presence",
            "cursor": vec_to_wire(msg.cursor),
            "viewport": rect_to_wire(msg.viewport),
            "holding": msg.holding,
        }
    if isinstance(msg, Speaking):
        return {"type": "speaking", "on": msg.on}
    if isinstance(msg, Ping):
        return {"type": "ping"}
    raise WireError(f"not a client message: {msg!r}")


# -- server -> client ------------------------------------------------------


def welcome(
    user_id: UserId,
    color: int,
    snapshot_doc: dict | None,
    clipboard: list,
    scoreboard: dict,
    resume_from_seq: int | None = None,
) -> dict:
    return {
        "type": "welcome",
        "your_user_id": user_id,
        "assigned_color": color,
        "snapshot": snapshot_doc,
        "resume_from_seq": resume_from_seq,
        "clipboard": clipboard,
        "scoreboard": scoreboard,
    }


def op_accepted(client_id: str, client_seq: int, server_seq: int) -> dict:
    return {"type": "op_accepted", "client_id": client_id, "client_seq": client_seq, "server_seq": server_seq}


def op_rejected(client_id: str, client_seq: int, reason: str) -> dict:
    return {"type": "op_rejected", "client_id": client_id, "client_seq": client_seq, "reason": reason}


def op_broadcast(op: Operation) -> dict:
    return {"type": "op_broadcast", "op": op_to_wire(op)}


def presence_broadcast(roster: list) -> dict:
    return {"type": "presence", "users": [p.to_wire() for p in roster]}


def score_update(scoreboard: dict) -> dict:
    return {"type": "score_update", "scoreboard": scoreboard}


def badge_change(holder: UserId | None) -> dict:
    return {"type": "badge_change", "holder": holder}


def pong() -> dict:
    return {"type": "pong"}


def error(message: str) -> dict:
    return {"type": "error", "message": message}
