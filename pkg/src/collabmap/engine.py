"""Deterministic workspace state machine: validation and application of edits.

``validate`` is a pure predicate returning a machine-readable reject reason
(or None for accept); ``apply`` folds an accepted operation into a new state
and reports every effected change as events, including cascades:

- deleting a note removes incident links, their labels, its panel
  attachment, and its group memberships;
- deleting a link removes its labels;
- deleting a panel detaches (never deletes) its notes;
- auto-resize panels are refit after any member note moves in or out.

Two replicas applying the same accepted sequence reach identical states.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from . import ops as op_types
from .geometry import (
    NOTE_PALETTE,
    SNAP_DISTANCE,
    Rect,
    Vec2,
    note_rect,
    panel_fit,
    quantize,
)
from .model import (
    GroupSelection,
    Label,
    Link,
    Note,
    Panel,
    WorkspaceState,
    ClipboardKind,
    make_id,
)
from .ops import Operation


class RejectReason(str, Enum):
    SELF_LINK = "self_link"
    UNKNOWN_TARGET = "unknown_target"
    DUPLICATE_LINK = "duplicate_link"
    INVALID_GEOMETRY = "invalid_geometry"
    INVALID_COLOR = "invalid_color"
    PANEL_TOO_SMALL = "panel_too_small"
    NO_GROUP = "no_group"
    ALREADY_ATTACHED = "already_attached"
    NOT_ATTACHED = "not_attached"
    UNKNOWN_CLIPBOARD_ITEM = "unknown_clipboard_item"
    CLIPBOARD_KIND_MISMATCH = "clipboard_kind_mismatch"
    SEQUENCE_GAP = "sequence_gap"
    UNKNOWN_ROOM = "unknown_room"
    MALFORMED = "malformed"


@dataclass(frozen=True)
class StateEvent:
    """One effected change; drives feedback cues and test assertions."""

    kind: str
    target: str
    actor: str
    extra: tuple = ()


def _qvec(v: Vec2) -> Vec2:
    return Vec2(quantize(v.x), quantize(v.y))


def _qrect(r: Rect) -> Rect:
    return Rect(_qvec(r.min), _qvec(r.max))


def validate(state: WorkspaceState, op: Operation) -> RejectReason | None:
    """Accept (None) iff applying `op` preserves every document invariant."""
    p = op.payload
    kind = p.kind

    if kind == "create_note":
        if not _qvec(p.position).is_valid():
            return RejectReason.INVALID_GEOMETRY
        if not _color_ok(p.color):
            return RejectReason.INVALID_COLOR
        return _check_clipboard(state, p.from_clipboard, ClipboardKind.NOTE_SOURCE)

    if kind == "set_note_text":
        return None if p.note in state.notes else RejectReason.UNKNOWN_TARGET

    if kind == "set_note_color":
        if p.note not in state.notes:
            return RejectReason.UNKNOWN_TARGET
        return None if _color_ok(p.color) else RejectReason.INVALID_COLOR

    if kind == "move_note":
        if p.note not in state.notes:
            return RejectReason.UNKNOWN_TARGET
        return None if _qvec(p.position).is_valid() else RejectReason.INVALID_GEOMETRY

    if kind == "delete_note":
        return None if p.note in state.notes else RejectReason.UNKNOWN_TARGET

    if kind == "create_link":
        if p.source == p.target:
            return RejectReason.SELF_LINK
        if p.source not in state.notes or p.target not in state.notes:
            return RejectReason.UNKNOWN_TARGET
        if state.link_between(p.source, p.target) is not None:
            return RejectReason.DUPLICATE_LINK
        return None

    if kind == "delete_link":
        return None if p.link in state.links else RejectReason.UNKNOWN_TARGET

    if kind == "attach_label":
        if p.link not in state.links:
            return RejectReason.UNKNOWN_TARGET
        return _check_clipboard(state, p.from_clipboard, ClipboardKind.LABEL_SOURCE)

    if kind in ("detach_label", "flip_label"):
        return None if p.label in state.labels else RejectReason.UNKNOWN_TARGET

    if kind == "set_group":
        for member in p.members:
            if member not in state.notes:
                return RejectReason.UNKNOWN_TARGET
        return None

    if kind == "clear_group":
        return None

    if kind == "move_group":
        group = state.groups.get(op.actor)
        if group is None:
            return RejectReason.NO_GROUP
        delta = _qvec(p.delta)
        if not delta.is_valid():
            return RejectReason.INVALID_GEOMETRY
        for member in group.members:
            if not (state.notes[member].position + delta).is_valid():
                return RejectReason.INVALID_GEOMETRY
        return None

    if kind == "create_panel":
        return None if _qrect(p.bounds).is_valid() else RejectReason.INVALID_GEOMETRY

    if kind == "move_panel":
        panel = state.panels.get(p.panel)
        if panel is None:
            return RejectReason.UNKNOWN_TARGET
        delta = _qvec(p.delta)
        if not delta.is_valid() or not panel.bounds.translate(delta).is_valid():
            return RejectReason.INVALID_GEOMETRY
        for member in panel.attached:
            if not (state.notes[member].position + delta).is_valid():
                return RejectReason.INVALID_GEOMETRY
        return None

    if kind == "resize_panel":
        panel = state.panels.get(p.panel)
        if panel is None:
            return RejectReason.UNKNOWN_TARGET
        bounds = _qrect(p.bounds)
        if not bounds.is_valid():
            return RejectReason.INVALID_GEOMETRY
        for member in panel.attached:
            if not bounds.contains_rect(note_rect(state.notes[member].position)):
                return RejectReason.PANEL_TOO_SMALL
        return None

    if kind == "delete_panel":
        return None if p.panel in state.panels else RejectReason.UNKNOWN_TARGET

    if kind == "attach_note_to_panel":
        note = state.notes.get(p.note)
        if note is None or p.panel not in state.panels:
            return RejectReason.UNKNOWN_TARGET
        if note.panel == p.panel:
            return RejectReason.ALREADY_ATTACHED
        return None

    if kind == "detach_note_from_panel":
        note = state.notes.get(p.note)
        if note is None:
            return RejectReason.UNKNOWN_TARGET
        return None if note.panel is not None else RejectReason.NOT_ATTACHED

    return RejectReason.MALFORMED


def _color_ok(color: int) -> bool:
    return isinstance(color, int) and not isinstance(color, bool) and 0 <= color < len(NOTE_PALETTE)


def _check_clipboard(state: WorkspaceState, item_id, want: ClipboardKind) -> RejectReason | None:
    if item_id is None:
        return None
    item = state.clipboard_item(item_id)
    if item is None:
        return RejectReason.UNKNOWN_CLIPBOARD_ITEM
    if item.kind != want:
        return RejectReason.CLIPBOARD_KIND_MISMATCH
    return None


def apply(state: WorkspaceState, op: Operation) -> tuple[WorkspaceState, list[StateEvent]]:
    """Fold a validated operation into a new state. Pure and deterministic."""
    reason = validate(state, op)
    if reason is not None:
        raise ValueError(f"apply called with invalid op {op.payload.kind}: {reason.value}")

    s = state.shallow_copy()
    events: list[StateEvent] = []
    p = op.payload
    actor = op.actor
    kind = p.kind

    if kind == "create_note":
        note_id = make_id("note", op.client_id, op.client_seq)
        s.notes[note_id] = Note(note_id, p.text, p.color, _qvec(p.position), actor)
        events.append(StateEvent("note_created", note_id, actor))

    elif kind == "set_note_text":
        s.notes[p.note] = replace(s.notes[p.note], text=p.text)
        events.append(StateEvent("note_text_set", p.note, actor))

    elif kind == "set_note_color":
        s.notes[p.note] = replace(s.notes[p.note], color=p.color)
        events.append(StateEvent("note_color_set", p.note, actor))

    elif kind == "move_note":
        s.notes[p.note] = replace(s.notes[p.note], position=_qvec(p.position))
        events.append(StateEvent("note_moved", p.note, actor))
        _ensure_fit(s, s.notes[p.note].panel, actor, events)

    elif kind == "delete_note":
        _delete_note(s, p.note, actor, events)

    elif kind == "create_link":
        link_id = make_id("link", op.client_id, op.client_seq)
        s.links[link_id] = Link(link_id, p.source, p.target, actor)
        events.append(StateEvent("link_created", link_id, actor))

    elif kind == "delete_link":
        _delete_link(s, p.link, actor, events)

    elif kind == "attach_label":
        label_id = make_id("label", op.client_id, op.client_seq)
        s.labels[label_id] = Label(label_id, p.text, p.orientation, actor, p.link)
        link = s.links[p.link]
        s.links[p.link] = replace(link, labels=link.labels + (label_id,))
        events.append(StateEvent("label_attached", label_id, actor))

    elif kind == "detach_label":
        _detach_label(s, p.label, actor, events)

    elif kind == "flip_label":
        label = s.labels[p.label]
        s.labels[p.label] = replace(label, orientation=label.orientation.flipped())
        events.append(StateEvent("label_flipped", p.label, actor))

    elif kind == "set_group":
        members = frozenset(p.members)
        if members:
            s.groups[actor] = GroupSelection(actor, members)
            events.append(StateEvent("group_set", actor, actor, tuple(sorted(members))))
        elif actor in s.groups:
            del s.groups[actor]
            events.append(StateEvent("group_cleared", actor, actor))

    elif kind == "clear_group":
        if actor in s.groups:
            del s.groups[actor]
            events.append(StateEvent("group_cleared", actor, actor))

    elif kind == "move_group":
        delta = _qvec(p.delta)
        group = s.groups[actor]
        panels_touched = []
        for member in sorted(group.members):
            note = s.notes[member]
            s.notes[member] = replace(note, position=note.position + delta)
            events.append(StateEvent("note_moved", member, actor))
            if note.panel is not None and note.panel not in panels_touched:
                panels_touched.append(note.panel)
        for panel_id in panels_touched:
            _ensure_fit(s, panel_id, actor, events)
        events.append(StateEvent("group_moved", actor, actor))

    elif kind == "create_panel":
        panel_id = make_id("panel", op.client_id, op.client_seq)
        s.panels[panel_id] = Panel(panel_id, _qrect(p.bounds), actor)
        events.append(StateEvent("panel_created", panel_id, actor))

    elif kind == "move_panel":
        delta = _qvec(p.delta)
        panel = s.panels[p.panel]
        for member in panel.attached:
            note = s.notes[member]
            s.notes[member] = replace(note, position=note.position + delta)
            events.append(StateEvent("note_moved", member, actor))
        s.panels[p.panel] = replace(panel, bounds=panel.bounds.translate(delta))
        events.append(StateEvent("panel_moved", p.panel, actor))
        _ensure_fit(s, p.panel, actor, events)

    elif kind == "resize_panel":
        panel = s.panels[p.panel]
        s.panels[p.panel] = replace(panel, bounds=_qrect(p.bounds), auto_resize=False)
        events.append(StateEvent("panel_resized", p.panel, actor))

    elif kind == "delete_panel":
        panel = s.panels[p.panel]
        for member in panel.attached:
            s.notes[member] = replace(s.notes[member], panel=None)
            events.append(StateEvent("note_detached", member, actor))
        del s.panels[p.panel]
        events.append(StateEvent("panel_deleted", p.panel, actor))

    elif kind == "attach_note_to_panel":
        note = s.notes[p.note]
        if note.panel is not None:
            _detach_from_panel(s, p.note, actor, events)
        panel = s.panels[p.panel]
        # A note attach re-enables auto resize after any manual resize.
        s.panels[p.panel] = replace(panel, attached=panel.attached + (p.note,), auto_resize=True)
        s.notes[p.note] = replace(s.notes[p.note], panel=p.panel)
        events.append(StateEvent("note_attached", p.note, actor))
        _ensure_fit(s, p.panel, actor, events)

    elif kind == "detach_note_from_panel":
        _detach_from_panel(s, p.note, actor, events)

    else:  # pragma: no cover - payload kinds are exhaustive
        raise ValueError(f"unknown payload kind {kind}")

    s.applied_seq += 1
    return s, events


def _delete_note(s: WorkspaceState, note_id: str, actor: str, events: list[StateEvent]) -> None:
    for link_id in [lid for lid, link in s.links.items() if note_id in link.pair]:
        _delete_link(s, link_id, actor, events)
    note = s.notes[note_id]
    if note.panel is not None:
        _detach_from_panel(s, note_id, actor, events)
    for owner in [o for o, g in s.groups.items() if note_id in g.members]:
        remaining = s.groups[owner].members - {note_id}
        if remaining:
            s.groups[owner] = GroupSelection(owner, remaining)
            events.append(StateEvent("group_set", owner, actor, tuple(sorted(remaining))))
        else:
            del s.groups[owner]
            events.append(StateEvent("group_cleared", owner, actor))
    del s.notes[note_id]
    events.append(StateEvent("note_deleted", note_id, actor))


def _delete_link(s: WorkspaceState, link_id: str, actor: str, events: list[StateEvent]) -> None:
    link = s.links[link_id]
    for label_id in link.labels:
        del s.labels[label_id]
        events.append(StateEvent("label_detached", label_id, actor))
    del s.links[link_id]
    events.append(StateEvent("link_deleted", link_id, actor))


def _detach_label(s: WorkspaceState, label_id: str, actor: str, events: list[StateEvent]) -> None:
    label = s.labels[label_id]
    link = s.links[label.link]
    s.links[label.link] = replace(link, labels=tuple(l for l in link.labels if l != label_id))
    del s.labels[label_id]
    events.append(StateEvent("label_detached", label_id, actor))


def _detach_from_panel(s: WorkspaceState, note_id: str, actor: str, events: list[StateEvent]) -> None:
    panel_id = s.notes[note_id].panel
    panel = s.panels[panel_id]
    s.panels[panel_id] = replace(panel, attached=tuple(n for n in panel.attached if n != note_id))
    s.notes[note_id] = replace(s.notes[note_id], panel=None)
    events.append(StateEvent("note_detached", note_id, actor))
    _ensure_fit(s, panel_id, actor, events)


def _ensure_fit(s: WorkspaceState, panel_id: str | None, actor: str, events: list[StateEvent]) -> None:
    """Restore panel bounds invariants after member geometry changed.

    Auto-resize panels refit exactly; manually sized panels grow just enough
    to keep containing their notes. Empty panels keep their prior bounds.
    """
    if panel_id is None:
        return
    panel = s.panels[panel_id]
    if not panel.attached:
        return
    rects = [note_rect(s.notes[n].position) for n in panel.attached]
    if panel.auto_resize:
        new_bounds = panel_fit(rects)
    else:
        new_bounds = panel.bounds
        for r in rects:
            new_bounds = new_bounds.union(r)
    if new_bounds != panel.bounds:
        s.panels[panel_id] = replace(panel, bounds=new_bounds)
        events.append(StateEvent("panel_refit", panel_id, actor))


def panel_snap(state: WorkspaceState, note_id: str, drop_position: Vec2, snap_distance: float = SNAP_DISTANCE) -> str | None:
    """Panel that captures a note dropped at `drop_position`, if any.

    A panel matches when its bounds expanded by the snap distance contain
    the drop point; the nearest panel centre wins, ties to the lowest id.
    """
    if note_id not in state.notes:
        raise KeyError(f"unknown note {note_id}")
    drop = _qvec(drop_position)
    best: tuple[float, str] | None = None
    for panel in state.panels.values():
        if panel.bounds.expand(snap_distance).contains_point(drop):
            c = panel.bounds.center
            dist = (drop.x - c.x) ** 2 + (drop.y - c.y) ** 2
            key = (dist, panel.id)
            if best is None or key < best:
                best = key
    return best[1] if best else None
