"""Mind-map document entities and the replicated workspace state.

Entities are immutable values; the workspace holds them in insertion-ordered
maps. Ids are strings of the form ``<kind>:<client>:<counter>`` so replicas
derive them from the originating operation without coordination.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .geometry import Rect, Vec2, note_rect, panel_fit

NoteId = str
LinkId = str
LabelId = str
PanelId = str
UserId = str
ClipboardItemId = str


def make_id(kind: str, client_id: str, counter: int) -> str:
    return f"{kind}:{client_id}:{counter}"


class Orientation(str, Enum):
    FORWARD = "forward"
    REVERSE = "reverse"

    def flipped(self) -> "Orientation":
        return Orientation.REVERSE if self is Orientation.FORWARD else Orientation.FORWARD


class ClipboardKind(str, Enum):
    NOTE_SOURCE = "note"
    LABEL_SOURCE = "label"


@dataclass(frozen=True)
class Note:
    id: NoteId
    text: str
    color: int
    position: Vec2  # note centre
    creator: UserId
    panel: PanelId | None = None


@dataclass(frozen=True)
class Link:
    id: LinkId
    source: NoteId
    target: NoteId
    creator: UserId
    labels: tuple[LabelId, ...] = ()

    @property
    def pair(self) -> frozenset:
        return frozenset((self.source, self.target))


@dataclass(frozen=True)
class Label:
    id: LabelId
    text: str
    orientation: Orientation
    creator: UserId
    link: LinkId


@dataclass(frozen=True)
class Panel:
    id: PanelId
    bounds: Rect
    creator: UserId
    attached: tuple[NoteId, ...] = ()
    auto_resize: bool = True


@dataclass(frozen=True)
class GroupSelection:
    owner: UserId
    members: frozenset


@dataclass(frozen=True)
class ClipboardItem:
    id: ClipboardItemId
    text: str
    kind: ClipboardKind


@dataclass
class WorkspaceState:
    """Authoritative replicated document.

    ``applied_seq`` counts the accepted operations folded into this state;
    the next accepted operation gets server sequence number applied_seq + 1.
    """

    notes: dict = field(default_factory=dict)
    links: dict = field(default_factory=dict)
    labels: dict = field(default_factory=dict)
    panels: dict = field(default_factory=dict)
    groups: dict = field(default_factory=dict)
    clipboard: list = field(default_factory=list)
    applied_seq: int = 0

    @staticmethod
    def empty(clipboard: list | None = None) -> "WorkspaceState":
        return WorkspaceState(clipboard=list(clipboard or []))

    def shallow_copy(self) -> "WorkspaceState":
        """Copy with fresh maps; entity values are immutable and shared."""
        return WorkspaceState(
            notes=dict(self.notes),
            links=dict(self.links),
            labels=dict(self.labels),
            panels=dict(self.panels),
            groups=dict(self.groups),
            clipboard=list(self.clipboard),
            applied_seq=self.applied_seq,
        )

    def link_between(self, a: NoteId, b: NoteId) -> Link | None:
        pair = frozenset((a, b))
        for link in self.links.values():
            if link.pair == pair:
                return link
        return None

    def clipboard_item(self, item_id: ClipboardItemId) -> ClipboardItem | None:
        for item in self.clipboard:
            if item.id == item_id:
                return item
        return None


def integrity_errors(state: WorkspaceState) -> list[str]:
    """Full-scan referential integrity and panel consistency check.

    Returns human-readable violations; empty list means the state is sound.
    Used by checked mode in the harness and by snapshot restore.
    """
    errors: list[str] = []
    seen_pairs: dict = {}
    for link in state.links.values():
        if link.source == link.target:
            errors.append(f"link {link.id} is a self-link")
        for end in (link.source, link.target):
            if end not in state.notes:
                errors.append(f"link {link.id} references missing note {end}")
        if link.pair in seen_pairs:
            errors.append(f"links {seen_pairs[link.pair]} and {link.id} share a note pair")
        seen_pairs[link.pair] = link.id
        for label_id in link.labels:
            label = state.labels.get(label_id)
            if label is None:
                errors.append(f"link {link.id} lists missing label {label_id}")
            elif label.link != link.id:
                errors.append(f"label {label_id} does not point back at link {link.id}")
    for label in state.labels.values():
        link = state.links.get(label.link)
        if link is None:
            errors.append(f"label {label.id} references missing link {label.link}")
        elif label.id not in link.labels:
            errors.append(f"label {label.id} missing from link {link.id} label list")
    attached_owner: dict = {}
    for panel in state.panels.values():
        if not panel.bounds.is_valid():
            errors.append(f"panel {panel.id} has malformed bounds")
        for note_id in panel.attached:
            note = state.notes.get(note_id)
            if note is None:
                errors.append(f"panel {panel.id} lists missing note {note_id}")
                continue
            if note.panel != panel.id:
                errors.append(f"note {note_id} does not point back at panel {panel.id}")
            if note_id in attached_owner:
                errors.append(f"note {note_id} attached to panels {attached_owner[note_id]} and {panel.id}")
            attached_owner[note_id] = panel.id
            if not panel.bounds.contains_rect(note_rect(note.position)):
                errors.append(f"panel {panel.id} bounds do not contain note {note_id}")
    for note in state.notes.values():
        if note.panel is not None:
            panel = state.panels.get(note.panel)
            if panel is None:
                errors.append(f"note {note.id} references missing panel {note.panel}")
            elif note.id not in panel.attached:
                errors.append(f"note {note.id} not in attached list of panel {note.panel}")
        if not note.position.is_valid():
            errors.append(f"note {note.id} has malformed position")
    for owner, group in state.groups.items():
        if group.owner != owner:
            errors.append(f"group keyed {owner} owned by {group.owner}")
        if not group.members:
            errors.append(f"group of {owner} is empty")
        for member in group.members:
            if member not in state.notes:
                errors.append(f"group of {owner} references missing note {member}")
    return errors


def panel_consistency_errors(state: WorkspaceState) -> list[str]:
    """Check that every auto-resize panel with notes sits exactly at its fit."""
    errors: list[str] = []
    for panel in state.panels.values():
        if not panel.auto_resize or not panel.attached:
            continue
        rects = [note_rect(state.notes[n].position) for n in panel.attached if n in state.notes]
        if not rects:
            continue
        want = panel_fit(rects)
        if want != panel.bounds:
            errors.append(f"auto-resize panel {panel.id} bounds {panel.bounds} != fit {want}")
    return errors


__all__ = [
    "NoteId", "LinkId", "LabelId", "PanelId", "UserId", "ClipboardItemId",
    "make_id", "Orientation", "ClipboardKind",
    "Note", "Link", "Label", "Panel", "GroupSelection", "ClipboardItem",
    "WorkspaceState", "integrity_errors", "panel_consistency_errors",
]
