"""Operation envelopes and mutation payloads — the unit of replication.

Every edit travels as an Operation: a (client_id, client_seq) identity, the
acting user, an informational wall clock, and one payload. The server
assigns server_seq on acceptance; ordering semantics depend only on it.
"""
from __future__ import annotations

from dataclasses import MISSING, dataclass, fields
from typing import Any

from .geometry import Rect, Vec2
from .model import Orientation


class WireError(ValueError):
    """A document arriving over the wire is structurally malformed."""


def ensure_encodable(text: str) -> None:
    """Reject unpaired surrogates, which would poison UTF-8 snapshots."""
    try:
        text.encode("utf-8")
    except UnicodeEncodeError as exc:
        raise WireError("text contains unpaired surrogates") from exc


@dataclass(frozen=True)
class CreateNote:
    kind = "create_note"
    text: str
    color: int
    position: Vec2
    from_clipboard: str | None = None


@dataclass(frozen=True)
class SetNoteText:
    kind = "set_note_text"
    note: str
    text: str


@dataclass(frozen=True)
class SetNoteColor:
    kind = "set_note_color"
    note: str
    color: int


@dataclass(frozen=True)
class MoveNote:
    kind = "move_note"
    note: str
    position: Vec2


@dataclass(frozen=True)
class DeleteNote:
    kind = "delete_note"
    note: str


@dataclass(frozen=True)
class CreateLink:
    kind = "create_link"
    source: str
    target: str


@dataclass(frozen=True)
class DeleteLink:
    kind = "delete_link"
    link: str


@dataclass(frozen=True)
class AttachLabel:
    kind = "attach_label"
    link: str
    text: str
    orientation: Orientation = Orientation.FORWARD
    from_clipboard: str | None = None


@dataclass(frozen=True)
class DetachLabel:
    kind = "detach_label"
    label: str


@dataclass(frozen=True)
class FlipLabel:
    kind = "flip_label"
    label: str


@dataclass(frozen=True)
class SetGroup:
    kind = "set_group"
    members: tuple[str, ...]


@dataclass(frozen=True)
class ClearGroup:
    kind = "clear_group"


@dataclass(frozen=True)
class MoveGroup:
    kind = "move_group"
    delta: Vec2


@dataclass(frozen=True)
class CreatePanel:
    kind = "create_panel"
    bounds: Rect


@dataclass(frozen=True)
class MovePanel:
    kind = "move_panel"
    panel: str
    delta: Vec2


@dataclass(frozen=True)
class ResizePanel:
    kind = "resize_panel"
    panel: str
    bounds: Rect


@dataclass(frozen=True)
class DeletePanel:
    kind = "delete_panel"
    panel: str


@dataclass(frozen=True)
class AttachNoteToPanel:
    kind = "attach_note_to_panel"
    note: str
    panel: str


@dataclass(frozen=True)
class DetachNoteFromPanel:
    kind = "detach_note_from_panel"
    note: str


PAYLOAD_TYPES = (
    CreateNote, SetNoteText, SetNoteColor, MoveNote, DeleteNote,
    CreateLink, DeleteLink,
    AttachLabel, DetachLabel, FlipLabel,
    SetGroup, ClearGroup, MoveGroup,
    CreatePanel, MovePanel, ResizePanel, DeletePanel,
    AttachNoteToPanel, DetachNoteFromPanel,
)
PAYLOAD_BY_KIND = {cls.kind: cls for cls in PAYLOAD_TYPES}

# Payloads that create a new artifact (notes, links, labels count as output).
CREATION_KINDS = frozenset({"create_note", "create_link", "attach_label"})

Payload = Any  # one of PAYLOAD_TYPES


@dataclass(frozen=True)
class Operation:
    client_id: str
    client_seq: int
    actor: str
    wall_clock_ms: int
    payload: Payload
    server_seq: int | None = None

    @property
    def op_id(self) -> tuple[str, int]:
        return (self.client_id, self.client_seq)

    def with_server_seq(self, seq: int) -> "Operation":
        return Operation(self.client_id, self.client_seq, self.actor, self.wall_clock_ms, self.payload, seq)


def vec_to_wire(v: Vec2) -> dict:
    return {"x": v.x, "y": v.y}


def vec_from_wire(doc: Any) -> Vec2:
    if not isinstance(doc, dict) or "x" not in doc or "y" not in doc:
        raise WireError(f"bad vector: {doc!r}")
    x, y = doc["x"], doc["y"]
    if not isinstance(x, (int, float)) or not isinstance(y, (int, float)) or isinstance(x, bool) or isinstance(y, bool):
        raise WireError(f"bad vector coordinates: {doc!r}")
    return Vec2(float(x), float(y))


def rect_to_wire(r: Rect) -> dict:
    return {"min": vec_to_wire(r.min), "max": vec_to_wire(r.max)}


def rect_from_wire(doc: Any) -> Rect:
    if not isinstance(doc, dict) or "min" not in doc or "max" not in doc:
        raise WireError(f"bad rect: {doc!r}")
    return Rect(vec_from_wire(doc["min"]), vec_from_wire(doc["max"]))


def payload_to_wire(payload: Payload) -> dict:
    doc: dict = {"kind": payload.kind}
    for f in fields(payload):
        value = getattr(payload, f.name)
        if isinstance(value, Vec2):
            value = vec_to_wire(value)
        elif isinstance(value, Rect):
            value = rect_to_wire(value)
        elif isinstance(value, Orientation):
            value = value.value
        elif isinstance(value, tuple):
            value = list(value)
        doc[f.name] = value
    return doc


def payload_from_wire(doc: Any) -> Payload:
    if not isinstance(doc, dict):
        raise WireError(f"payload must be an object, got {type(doc).__name__}")
    kind = doc.get("kind")
    cls = PAYLOAD_BY_KIND.get(kind)
    if cls is None:
        raise WireError(f"unknown payload kind {kind!r}")
    kwargs = {}
    for f in fields(cls):
        if f.name not in doc:
            if f.default is not MISSING:
                kwargs[f.name] = f.default
                continue
            raise WireError(f"payload {kind} missing field {f.name}")
        value = doc[f.name]
        if f.name in ("position", "delta"):
            value = vec_from_wire(value)
        elif f.name == "bounds":
            value = rect_from_wire(value)
        elif f.name == "orientation":
            try:
                value = Orientation(value)
            except ValueError as exc:
                raise WireError(f"bad orientation {value!r}") from exc
        elif f.name == "members":
            if not isinstance(value, list) or not all(isinstance(m, str) for m in value):
                raise WireError(f"bad members list: {value!r}")
            value = tuple(value)
        elif f.name == "color":
            if not isinstance(value, int) or isinstance(value, bool):
                raise WireError(f"bad color {value!r}")
        elif f.name in ("text",):
            if not isinstance(value, str):
                raise WireError(f"bad text {value!r}")
            ensure_encodable(value)
        elif f.name in ("note", "link", "label", "panel", "source", "target"):
            if not isinstance(value, str):
                raise WireError(f"bad id {value!r}")
        elif f.name == "from_clipboard":
            if value is not None and not isinstance(value, str):
                raise WireError(f"bad clipboard id {value!r}")
        kwargs[f.name] = value
    return cls(**kwargs)


def op_to_wire(op: Operation) -> dict:
    return {
        "client_id": op.client_id,
        "client_seq": op.client_seq,
        "actor": op.actor,
        "wall_clock_ms": op.wall_clock_ms,
        "server_seq": op.server_seq,
        "payload": payload_to_wire(op.payload),
    }


def op_from_wire(doc: Any) -> Operation:
    if not isinstance(doc, dict):
        raise WireError("operation must be an object")
    try:
        client_id = doc["client_id"]
        client_seq = doc["client_seq"]
        actor = doc["actor"]
        wall_clock_ms = doc.get("wall_clock_ms", 0)
        payload = payload_from_wire(doc["payload"])
    except KeyError as exc:
        raise WireError(f"operation missing field {exc}") from exc
    if not isinstance(client_id, str) or not isinstance(actor, str):
        raise WireError("operation ids must be strings")
    if not isinstance(client_seq, int) or isinstance(client_seq, bool) or client_seq < 1:
        raise WireError(f"bad client_seq {client_seq!r}")
    if not isinstance(wall_clock_ms, int) or isinstance(wall_clock_ms, bool):
        raise WireError(f"bad wall_clock_ms {wall_clock_ms!r}")
    server_seq = doc.get("server_seq")
    if server_seq is not None and (not isinstance(server_seq, int) or isinstance(server_seq, bool)):
        raise WireError(f"bad server_seq {server_seq!r}")
    return Operation(client_id, client_seq, actor, wall_clock_ms, payload, server_seq)
