"""Transport-agnostic room hosting: membership, presence, message dispatch.

RoomHost speaks the wire protocol in terms of already-parsed documents: feed
it one client message, get back a list of (connection, message) pairs to
deliver. The websocket server and the in-process simulation harness both
drive this same code, so protocol behaviour is tested without sockets.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

from . import protocol
from .engine import RejectReason
from .geometry import AVATAR_PALETTE, Rect, Vec2
from .ops import WireError
from .protocol import Hello, Ping, PresenceUpdate, Speaking, SubmitOp
from .room import Room, wall_clock_ms
from .snapshot import state_to_doc

logger = logging.getLogger(__name__)

# Presence updates from one client are rebroadcast at most this often.
PRESENCE_MIN_INTERVAL_MS = 50
# Connections silent for longer than this are reaped.
HEARTBEAT_TIMEOUT_MS = 15_000


@dataclass
class Member:
    conn_id: str
    user_id: str
    name: str
    color: int
    presence: protocol.PresenceState
    last_heard: int = 0
    last_presence_broadcast: int = -10**12


@dataclass
class HostedRoom:
    room: Room
    members: dict = field(default_factory=dict)  # conn_id -> Member

    def roster(self) -> list:
        return [m.presence for m in self.members.values()]


Outbox = list  # of (conn_id, message-dict) pairs


class RoomHost:
    """Hosts many rooms; one logical writer per room."""

    def __init__(self, make_room, clock=wall_clock_ms):
        self.make_room = make_room
        self.clock = clock
        self.rooms: dict = {}  # room_id -> HostedRoom
        self.conn_room: dict = {}  # conn_id -> room_id
        self.on_room_idle = None  # callback(room_id, HostedRoom) on last leave

    # -- lifecycle -----------------------------------------------------------

    def room_of(self, conn_id: str) -> HostedRoom | None:
        room_id = self.conn_room.get(conn_id)
        return self.rooms.get(room_id) if room_id else None

    def handle(self, conn_id: str, msg) -> Outbox:
        if isinstance(msg, Hello):
            return self._hello(conn_id, msg)
        hosted = self.room_of(conn_id)
        if hosted is None:
            return [(conn_id, protocol.error("not joined"))]
        member = hosted.members.get(conn_id)
        if member is None:
            return [(conn_id, protocol.error("not joined"))]
        member.last_heard = self.clock()
        member.presence.last_heard = member.last_heard
        if isinstance(msg, SubmitOp):
            return self._submit(hosted, member, msg)
        if isinstance(msg, PresenceUpdate):
            return self._presence(hosted, member, msg)
        if isinstance(msg, Speaking):
            return self._speaking(hosted, member, msg)
        if isinstance(msg, Ping):
            return [(conn_id, protocol.pong())]
        return [(conn_id, protocol.error("unknown message"))]

    def disconnect(self, conn_id: str) -> Outbox:
        hosted = self.room_of(conn_id)
        self.conn_room.pop(conn_id, None)
        if hosted is None:
            return []
        member = hosted.members.pop(conn_id, None)
        if member is None:
            return []
        logger.info("room %s: %s left", hosted.room.room_id, member.user_id)
        if not hosted.members and self.on_room_idle is not None:
            self.on_room_idle(hosted.room.room_id, hosted)
        return self._broadcast_presence(hosted)

    def reap(self, now: int) -> Outbox:
        """Drop members whose connections have been silent too long."""
        outbox: Outbox = []
        for hosted in list(self.rooms.values()):
            for conn_id, member in list(hosted.members.items()):
                if now - member.last_heard > HEARTBEAT_TIMEOUT_MS:
                    logger.info("room %s: reaping silent member %s", hosted.room.room_id, member.user_id)
                    outbox.extend(self.disconnect(conn_id))
        return outbox

    # -- message handlers ----------------------------------------------------

    def _hello(self, conn_id: str, msg: Hello) -> Outbox:
        now = self.clock()
        hosted = self.rooms.get(msg.room)
        if hosted is None:
            room = self.make_room(msg.room)
            if room is None:
                return [(conn_id, protocol.error(f"unknown room {msg.room!r}"))]
            hosted = HostedRoom(room=room)
            self.rooms[msg.room] = hosted
        room = hosted.room

        user_id = room.next_user_id()
        active_names = {m.name for m in hosted.members.values()}
        name = msg.name
        suffix = 2
        while name in active_names:
            name = f"{msg.name} ({suffix})"
            suffix += 1
        color = room.assign_color({m.color for m in hosted.members.values()}, len(AVATAR_PALETTE))
        presence = protocol.PresenceState(
            user=user_id,
            name=name,
            color=color,
            cursor=Vec2(0.0, 0.0),
            viewport=Rect(Vec2(0.0, 0.0), Vec2(0.0, 0.0)),
            last_heard=now,
        )
        member = Member(conn_id, user_id, name, color, presence, last_heard=now)
        hosted.members[conn_id] = member
        self.conn_room[conn_id] = msg.room
        room.register_user(user_id)
        logger.info("room %s: %s joined as %s", msg.room, name, user_id)

        clipboard_wire = [{"id": c.id, "text": c.text, "kind": c.kind.value} for c in room.state.clipboard]
        scoreboard_wire = room.metrics.board.to_wire(now)
        outbox: Outbox = []
        if msg.resume_from_seq is not None:
            mode, payload = room.catch_up(msg.resume_from_seq)
            if mode == "replay":
                outbox.append(
                    (conn_id, protocol.welcome(user_id, color, None, clipboard_wire, scoreboard_wire, msg.resume_from_seq))
                )
                for op in payload:
                    outbox.append((conn_id, protocol.op_broadcast(op)))
            else:
                outbox.append(
                    (conn_id, protocol.welcome(user_id, color, state_to_doc(payload), clipboard_wire, scoreboard_wire))
                )
        else:
            outbox.append(
                (conn_id, protocol.welcome(user_id, color, state_to_doc(room.state), clipboard_wire, scoreboard_wire))
            )
        outbox.extend(self._broadcast_presence(hosted))
        return outbox

    def _submit(self, hosted: HostedRoom, member: Member, msg: SubmitOp) -> Outbox:
        op = msg.op
        if op.client_id != member.user_id or op.actor != member.user_id:
            return [(member.conn_id, protocol.op_rejected(op.client_id, op.client_seq, RejectReason.MALFORMED.value))]
        outcome = hosted.room.sequence(op)
        outbox: Outbox = []
        if outcome.accepted:
            outbox.append(
                (member.conn_id, protocol.op_accepted(op.client_id, op.client_seq, outcome.op.server_seq))
            )
            if not outcome.duplicate:
                message = protocol.op_broadcast(outcome.op)
                outbox.extend((cid, message) for cid in hosted.members)
                outbox.extend(self._score_messages(hosted, outcome.score_events))
        else:
            outbox.append(
                (member.conn_id, protocol.op_rejected(op.client_id, op.client_seq, outcome.reason.value))
            )
        return outbox

    def _presence(self, hosted: HostedRoom, member: Member, msg: PresenceUpdate) -> Outbox:
        p = member.presence
        if msg.cursor.is_valid():
            p.cursor = msg.cursor
        if msg.viewport.is_valid():
            p.viewport = msg.viewport
        p.holding = msg.holding
        now = self.clock()
        if now - member.last_presence_broadcast < PRESENCE_MIN_INTERVAL_MS:
            return []  # throttled; the roster carries the latest state anyway
        member.last_presence_broadcast = now
        return self._broadcast_presence(hosted)

    def _speaking(self, hosted: HostedRoom, member: Member, msg: Speaking) -> Outbox:
        member.presence.speaking = msg.on
        hosted.room.record_speaking(member.user_id, msg.on)
        outbox = self._broadcast_presence(hosted)
        if hosted.room.gamification_enabled:
            update = protocol.score_update(hosted.room.metrics.board.to_wire(self.clock()))
            outbox.extend((cid, update) for cid in hosted.members)
        return outbox

    # -- helpers -------------------------------------------------------------

    def _score_messages(self, hosted: HostedRoom, score_events) -> Outbox:
        if not score_events:
            return []
        outbox: Outbox = []
        update = protocol.score_update(hosted.room.metrics.board.to_wire(self.clock()))
        outbox.extend((cid, update) for cid in hosted.members)
        for event in score_events:
            if event.kind == "leadership_shift":
                message = protocol.badge_change(event.new_value)
                outbox.extend((cid, message) for cid in hosted.members)
        return outbox

    def _broadcast_presence(self, hosted: HostedRoom) -> Outbox:
        message = protocol.presence_broadcast(hosted.roster())
        return [(cid, message) for cid in hosted.members]
