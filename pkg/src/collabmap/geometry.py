"""2D canvas geometry: vectors, rectangles, and the fixed layout constants.

Coordinates are canvas units with y growing downward (screen convention).
All coordinates entering the document are quantized to 4 decimal places so
that every replica — including ones written in other languages — computes
bit-identical doubles and serializes them identically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

# Notes are fixed-size squares; the pin sits at the top centre.
NOTE_WIDTH = 120.0
NOTE_HEIGHT = 120.0

# Panel snap distance, panel fit margin, and vertical label spacing.
SNAP_DISTANCE = 40.0
PANEL_MARGIN = 20.0
LABEL_SPACING = 24.0

# Coordinates beyond this magnitude are rejected as malformed; the bound
# also keeps float repr in plain decimal notation on every platform.
MAX_COORD = 1e9

NOTE_PALETTE = (
    "yellow", "pink", "green", "blue", "orange", "purple", "teal", "gray",
)
AVATAR_PALETTE = (
    "red", "blue", "green", "orange", "purple", "cyan", "magenta", "brown",
)


def quantize(value: float) -> float:
    """Round to 4 decimal places, half up, identically on every platform."""
    if not math.isfinite(value):
        return value
    return math.floor(value * 10000.0 + 0.5) / 10000.0


def coord_ok(value: float) -> bool:
    return isinstance(value, (int, float)) and math.isfinite(value) and abs(value) <= MAX_COORD


@dataclass(frozen=True)
class Vec2:
    x: float
    y: float

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(quantize(self.x + other.x), quantize(self.y + other.y))

    def is_valid(self) -> bool:
        return coord_ok(self.x) and coord_ok(self.y)

    @staticmethod
    def of(x: float, y: float) -> "Vec2":
        return Vec2(quantize(x), quantize(y))


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle with min corner <= max corner."""

    min: Vec2
    max: Vec2

    def is_valid(self) -> bool:
        return (
            self.min.is_valid()
            and self.max.is_valid()
            and self.min.x <= self.max.x
            and self.min.y <= self.max.y
        )

    @property
    def width(self) -> float:
        return self.max.x - self.min.x

    @property
    def height(self) -> float:
        return self.max.y - self.min.y

    @property
    def center(self) -> Vec2:
        return Vec2(quantize((self.min.x + self.max.x) / 2.0), quantize((self.min.y + self.max.y) / 2.0))

    def contains_point(self, p: Vec2) -> bool:
        return self.min.x <= p.x <= self.max.x and self.min.y <= p.y <= self.max.y

    def contains_rect(self, other: "Rect") -> bool:
        return (
            self.min.x <= other.min.x
            and self.min.y <= other.min.y
            and self.max.x >= other.max.x
            and self.max.y >= other.max.y
        )

    def expand(self, amount: float) -> "Rect":
        return Rect(
            Vec2(quantize(self.min.x - amount), quantize(self.min.y - amount)),
            Vec2(quantize(self.max.x + amount), quantize(self.max.y + amount)),
        )

    def union(self, other: "Rect") -> "Rect":
        return Rect(
            Vec2(min(self.min.x, other.min.x), min(self.min.y, other.min.y)),
            Vec2(max(self.max.x, other.max.x), max(self.max.y, other.max.y)),
        )

    def translate(self, delta: Vec2) -> "Rect":
        return Rect(self.min + delta, self.max + delta)

    @staticmethod
    def of(min_x: float, min_y: float, max_x: float, max_y: float) -> "Rect":
        return Rect(Vec2.of(min_x, min_y), Vec2.of(max_x, max_y))


def note_rect(position: Vec2) -> Rect:
    """Rectangle of a note whose centre is at `position`."""
    hw, hh = NOTE_WIDTH / 2.0, NOTE_HEIGHT / 2.0
    return Rect(
        Vec2(quantize(position.x - hw), quantize(position.y - hh)),
        Vec2(quantize(position.x + hw), quantize(position.y + hh)),
    )


def pin_anchor(position: Vec2) -> Vec2:
    """Pin point of a note: top centre of its rectangle."""
    return Vec2(position.x, quantize(position.y - NOTE_HEIGHT / 2.0))


def panel_fit(note_rects: list[Rect], margin: float = PANEL_MARGIN) -> Rect:
    """Bounding box of all note rectangles expanded by `margin` on each side.

    Callers must not pass an empty list; a panel with zero notes keeps its
    prior bounds instead of refitting.
    """
    if not note_rects:
        raise ValueError("panel_fit requires at least one note rectangle")
    box = note_rects[0]
    for r in note_rects[1:]:
        box = box.union(r)
    return box.expand(margin)


def label_offsets(count: int, spacing: float = LABEL_SPACING) -> list[float]:
    """Vertical offsets for `count` labels stacked symmetrically around 0."""
    return [quantize((i - (count - 1) / 2.0) * spacing) for i in range(count)]


def label_layout(start: Vec2, end: Vec2, label_ids: list[str], spacing: float = LABEL_SPACING) -> list[tuple[str, Vec2]]:
    """Positions for labels on the segment start-end.

    Labels stack centred on the segment midpoint with vertical spacing,
    preserving list order top to bottom.
    """
    mid = Vec2(quantize((start.x + end.x) / 2.0), quantize((start.y + end.y) / 2.0))
    offsets = label_offsets(len(label_ids), spacing)
    return [(label_id, Vec2(mid.x, quantize(mid.y + dy))) for label_id, dy in zip(label_ids, offsets)]
