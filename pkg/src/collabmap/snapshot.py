"""Canonical, byte-stable workspace serialization.

The snapshot document is JSON with sorted keys, no whitespace, UTF-8, and
integral floats emitted as integers, so any two replicas holding the same
state produce identical bytes and can be compared directly. ``restore``
refuses documents that violate referential integrity.
"""
from __future__ import annotations

import json
from typing import Any

from .geometry import Rect, Vec2
from .model import (
    ClipboardItem,
    ClipboardKind,
    GroupSelection,
    Label,
    Link,
    Note,
    Orientation,
    Panel,
    WorkspaceState,
    integrity_errors,
)


class SnapshotError(ValueError):
    """Snapshot document is malformed or violates integrity."""


def _canonical_numbers(value: Any) -> Any:
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            raise SnapshotError(f"non-finite number {value!r}")
        if value.is_integer() and abs(value) < 2**53:
            return int(value)
        return value
    if isinstance(value, dict):
        return {k: _canonical_numbers(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_canonical_numbers(v) for v in value]
    return value


def canonical_json(doc: Any) -> str:
    return json.dumps(_canonical_numbers(doc), sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def canonical_bytes(doc: Any) -> bytes:
    return canonical_json(doc).encode("utf-8")


def _vec(v: Vec2) -> dict:
    return {"x": v.x, "y": v.y}


def _rect(r: Rect) -> dict:
    return {"min": _vec(r.min), "max": _vec(r.max)}


def state_to_doc(state: WorkspaceState) -> dict:
    return {
        "applied_seq": state.applied_seq,
        "notes": {
            n.id: {
                "id": n.id,
                "text": n.text,
                "color": n.color,
                "position": _vec(n.position),
                "creator": n.creator,
                "panel": n.panel,
            }
            for n in state.notes.values()
        },
        "links": {
            l.id: {
                "id": l.id,
                "source": l.source,
                "target": l.target,
                "creator": l.creator,
                "labels": list(l.labels),
            }
            for l in state.links.values()
        },
        "labels": {
            lb.id: {
                "id": lb.id,
                "text": lb.text,
                "orientation": lb.orientation.value,
                "creator": lb.creator,
                "link": lb.link,
            }
            for lb in state.labels.values()
        },
        "panels": {
            p.id: {
                "id": p.id,
                "bounds": _rect(p.bounds),
                "attached": list(p.attached),
                "creator": p.creator,
                "auto_resize": p.auto_resize,
            }
            for p in state.panels.values()
        },
        "groups": {
            g.owner: {"owner": g.owner, "members": sorted(g.members)}
            for g in state.groups.values()
        },
        "clipboard": [
            {"id": c.id, "text": c.text, "kind": c.kind.value} for c in state.clipboard
        ],
    }


def snapshot(state: WorkspaceState) -> bytes:
    return canonical_bytes(state_to_doc(state))


def _need(doc: dict, key: str, types) -> Any:
    if key not in doc:
        raise SnapshotError(f"missing field {key!r}")
    value = doc[key]
    if not isinstance(value, types) or isinstance(value, bool) and types is not bool:
        raise SnapshotError(f"field {key!r} has wrong type {type(value).__name__}")
    return value


def _vec_from(doc: Any) -> Vec2:
    if not isinstance(doc, dict):
        raise SnapshotError(f"bad vector {doc!r}")
    x, y = doc.get("x"), doc.get("y")
    for v in (x, y):
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise SnapshotError(f"bad vector {doc!r}")
    return Vec2(float(x), float(y))


def _rect_from(doc: Any) -> Rect:
    if not isinstance(doc, dict):
        raise SnapshotError(f"bad rect {doc!r}")
    return Rect(_vec_from(doc.get("min")), _vec_from(doc.get("max")))


def doc_to_state(doc: Any) -> WorkspaceState:
    if not isinstance(doc, dict):
        raise SnapshotError("snapshot document must be an object")
    state = WorkspaceState()
    applied_seq = _need(doc, "applied_seq", int)
    if applied_seq < 0:
        raise SnapshotError("applied_seq must be non-negative")
    state.applied_seq = applied_seq

    for note_id, nd in _need(doc, "notes", dict).items():
        if not isinstance(nd, dict):
            raise SnapshotError(f"bad note record {note_id}")
        panel = nd.get("panel")
        if panel is not None and not isinstance(panel, str):
            raise SnapshotError(f"bad panel ref on note {note_id}")
        state.notes[note_id] = Note(
            id=_need(nd, "id", str),
            text=_need(nd, "text", str),
            color=_need(nd, "color", int),
            position=_vec_from(nd.get("position")),
            creator=_need(nd, "creator", str),
            panel=panel,
        )
        if state.notes[note_id].id != note_id:
            raise SnapshotError(f"note key {note_id} does not match id field")

    for link_id, ld in _need(doc, "links", dict).items():
        if not isinstance(ld, dict):
            raise SnapshotError(f"bad link record {link_id}")
        labels = ld.get("labels", [])
        if not isinstance(labels, list) or not all(isinstance(x, str) for x in labels):
            raise SnapshotError(f"bad labels list on link {link_id}")
        state.links[link_id] = Link(
            id=_need(ld, "id", str),
            source=_need(ld, "source", str),
            target=_need(ld, "target", str),
            creator=_need(ld, "creator", str),
            labels=tuple(labels),
        )
        if state.links[link_id].id != link_id:
            raise SnapshotError(f"link key {link_id} does not match id field")

    for label_id, bd in _need(doc, "labels", dict).items():
        if not isinstance(bd, dict):
            raise SnapshotError(f"bad label record {label_id}")
        try:
            orientation = Orientation(_need(bd, "orientation", str))
        except ValueError as exc:
            raise SnapshotError(f"bad orientation on label {label_id}") from exc
        state.labels[label_id] = Label(
            id=_need(bd, "id", str),
            text=_need(bd, "text", str),
            orientation=orientation,
            creator=_need(bd, "creator", str),
            link=_need(bd, "link", str),
        )
        if state.labels[label_id].id != label_id:
            raise SnapshotError(f"label key {label_id} does not match id field")

    for panel_id, pd in _need(doc, "panels", dict).items():
        if not isinstance(pd, dict):
            raise SnapshotError(f"bad panel record {panel_id}")
        attached = pd.get("attached", [])
        if not isinstance(attached, list) or not all(isinstance(x, str) for x in attached):
            raise SnapshotError(f"bad attached list on panel {panel_id}")
        auto_resize = pd.get("auto_resize")
        if not isinstance(auto_resize, bool):
            raise SnapshotError(f"bad auto_resize on panel {panel_id}")
        state.panels[panel_id] = Panel(
            id=_need(pd, "id", str),
            bounds=_rect_from(pd.get("bounds")),
            creator=_need(pd, "creator", str),
            attached=tuple(attached),
            auto_resize=auto_resize,
        )
        if state.panels[panel_id].id != panel_id:
            raise SnapshotError(f"panel key {panel_id} does not match id field")

    for owner, gd in _need(doc, "groups", dict).items():
        if not isinstance(gd, dict):
            raise SnapshotError(f"bad group record {owner}")
        members = gd.get("members")
        if not isinstance(members, list) or not all(isinstance(x, str) for x in members):
            raise SnapshotError(f"bad members list for group {owner}")
        state.groups[owner] = GroupSelection(owner=_need(gd, "owner", str), members=frozenset(members))
        if state.groups[owner].owner != owner:
            raise SnapshotError(f"group key {owner} does not match owner field")

    for cd in _need(doc, "clipboard", list):
        if not isinstance(cd, dict):
            raise SnapshotError("bad clipboard record")
        try:
            kind = ClipboardKind(_need(cd, "kind", str))
        except ValueError as exc:
            raise SnapshotError("bad clipboard kind") from exc
        state.clipboard.append(ClipboardItem(id=_need(cd, "id", str), text=_need(cd, "text", str), kind=kind))

    violations = integrity_errors(state)
    if violations:
        raise SnapshotError("IntegrityViolation: " + "; ".join(violations[:5]))
    return state


def restore(raw: bytes | str) -> WorkspaceState:
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise SnapshotError(f"snapshot is not valid JSON: {exc}") from exc
    return doc_to_state(doc)
