"""Situational-awareness derivations: clone indicators and the minimap.

Pure functions over value snapshots of the workspace and presence roster;
safe to call from any thread. Nothing here travels on the wire — clients
compute both artifacts locally from their replica.
"""
from __future__ import annotations

from dataclasses import dataclass

from .geometry import AVATAR_PALETTE, Rect, Vec2, note_rect, pin_anchor, quantize
from .model import UserId, WorkspaceState

# The minimap never shrinks below this world window, and content is padded
# by 10% so items do not touch the minimap edge.
MIN_WORLD_EXTENT = 2000.0
WORLD_PADDING_RATIO = 0.10


def normalize_text(s: str) -> str:
    """Trim, collapse whitespace runs to single spaces, and casefold."""
    return " ".join(s.split()).casefold()


@dataclass(frozen=True)
class CloneIndicatorSet:
    source: str
    targets: frozenset
    active: bool


def clone_targets(state: WorkspaceState, source: str, active: bool = False) -> CloneIndicatorSet:
    """All other notes whose normalized non-empty text equals the source's.

    ``active`` mirrors whether the source note is currently held; callers
    take it from presence.
    """
    note = state.notes.get(source)
    if note is None:
        raise KeyError(f"unknown note {source}")
    wanted = normalize_text(note.text)
    if not wanted:
        return CloneIndicatorSet(source, frozenset(), active)
    targets = frozenset(
        other.id
        for other in state.notes.values()
        if other.id != source and normalize_text(other.text) == wanted
    )
    return CloneIndicatorSet(source, targets, active)


@dataclass(frozen=True)
class MinimapItem:
    kind: str  # note | link | label | panel
    ref: str
    creator: UserId
    color: int  # avatar palette index of the creator
    points: tuple  # projected geometry: rect corners or segment endpoints


@dataclass(frozen=True)
class MinimapViewport:
    user: UserId
    rect: Rect
    color: int


@dataclass(frozen=True)
class MinimapModel:
    scale: float
    offset: Vec2  # world point world_bounds.min maps to offset in minimap space
    items: tuple = ()
    viewports: tuple = ()


def fallback_color(user: UserId) -> int:
    """Stable palette index for creators who are no longer present."""
    digest = 0
    for ch in user:
        digest = (digest * 31 + ord(ch)) % 1_000_003
    return digest % len(AVATAR_PALETTE)


def world_bounds(state: WorkspaceState) -> Rect:
    """Bounding box of all content padded 10%, at least the default window."""
    box: Rect | None = None
    for note in state.notes.values():
        r = note_rect(note.position)
        box = r if box is None else box.union(r)
    for panel in state.panels.values():
        box = panel.bounds if box is None else box.union(panel.bounds)
    if box is None:
        half = MIN_WORLD_EXTENT / 2.0
        return Rect(Vec2(-half, -half), Vec2(half, half))
    pad = max(box.width, box.height) * WORLD_PADDING_RATIO
    box = box.expand(pad if pad > 0 else MIN_WORLD_EXTENT * WORLD_PADDING_RATIO)
    if box.width < MIN_WORLD_EXTENT or box.height < MIN_WORLD_EXTENT:
        cx, cy = box.center.x, box.center.y
        half_w = max(box.width, MIN_WORLD_EXTENT) / 2.0
        half_h = max(box.height, MIN_WORLD_EXTENT) / 2.0
        box = Rect(Vec2(quantize(cx - half_w), quantize(cy - half_h)), Vec2(quantize(cx + half_w), quantize(cy + half_h)))
    return box


def minimap_project(
    state: WorkspaceState,
    presence: list,
    world: Rect,
    minimap_size: Vec2,
    creator_colors: dict | None = None,
) -> MinimapModel:
    """Project every workspace item and user viewport into minimap space.

    Uniform scale preserving aspect ratio, content centred. Items take the
    creator's avatar color; creators who have left fall back to a stable
    hash color unless ``creator_colors`` supplies one.
    """
    if world.width <= 0 or world.height <= 0:
        raise ValueError("world bounds must be non-degenerate")
    scale = min(minimap_size.x / world.width, minimap_size.y / world.height)
    # Centre the scaled world inside the minimap.
    off_x = (minimap_size.x - world.width * scale) / 2.0
    off_y = (minimap_size.y - world.height * scale) / 2.0
    offset = Vec2(off_x, off_y)

    colors = dict(creator_colors or {})
    for p in presence:
        colors.setdefault(p.user, p.color)

    def color_of(user: UserId) -> int:
        return colors.get(user, fallback_color(user))

    def project(pt: Vec2) -> Vec2:
        return Vec2(
            (pt.x - world.min.x) * scale + offset.x,
            (pt.y - world.min.y) * scale + offset.y,
        )

    def project_rect(r: Rect) -> tuple:
        a, b = project(r.min), project(r.max)
        return (a, b)

    items: list[MinimapItem] = []
    for note in state.notes.values():
        items.append(MinimapItem("note", note.id, note.creator, color_of(note.creator), project_rect(note_rect(note.position))))
    for link in state.links.values():
        a = pin_anchor(state.notes[link.source].position)
        b = pin_anchor(state.notes[link.target].position)
        items.append(MinimapItem("link", link.id, link.creator, color_of(link.creator), (project(a), project(b))))
    for label in state.labels.values():
        link = state.links[label.link]
        a = pin_anchor(state.notes[link.source].position)
        b = pin_anchor(state.notes[link.target].position)
        mid = Vec2((a.x + b.x) / 2.0, (a.y + b.y) / 2.0)
        items.append(MinimapItem("label", label.id, label.creator, color_of(label.creator), (project(mid),)))
    for panel in state.panels.values():
        items.append(MinimapItem("panel", panel.id, panel.creator, color_of(panel.creator), project_rect(panel.bounds)))

    viewports = tuple(
        MinimapViewport(p.user, Rect(project(p.viewport.min), project(p.viewport.max)), p.color)
        for p in presence
    )
    return MinimapModel(scale=scale, offset=offset, items=tuple(items), viewports=viewports)
