"""Shared test helpers: op factories and a randomized workspace builder."""
from __future__ import annotations

import random

from collabmap.engine import apply, validate
from collabmap.geometry import Rect, Vec2
from collabmap.model import WorkspaceState
from collabmap.ops import (
    AttachLabel,
    AttachNoteToPanel,
    ClearGroup,
    CreateLink,
    CreateNote,
    CreatePanel,
    DeleteLink,
    DeleteNote,
    DeletePanel,
    DetachLabel,
    DetachNoteFromPanel,
    FlipLabel,
    MoveGroup,
    MoveNote,
    MovePanel,
    Operation,
    ResizePanel,
    SetGroup,
    SetNoteColor,
    SetNoteText,
)

VOCAB = [
    "water", "cycle", "rain", "cloud", "river", "ocean", "Water", "RAIN ",
    "evaporation", "condensation", "soil", "sun", "wind", " cloud",
]


class OpFactory:
    """Builds well-formed operation envelopes with increasing client seqs."""

    def __init__(self, user: str):
        self.user = user
        self.seq = 0

    def op(self, payload, wall_clock_ms: int = 0) -> Operation:
        self.seq += 1
        return Operation(self.user, self.seq, self.user, wall_clock_ms, payload)


def fold(state: WorkspaceState, ops) -> WorkspaceState:
    for op in ops:
        assert validate(state, op) is None, f"{op.payload.kind} unexpectedly invalid"
        state, _ = apply(state, op)
    return state


def random_payload(rng: random.Random, state: WorkspaceState, actor: str):
    """One candidate payload against the current state; may be invalid."""
    notes = list(state.notes)
    links = list(state.links)
    labels = list(state.labels)
    panels = list(state.panels)
    kinds = ["create_note"] * 6
    if notes:
        kinds += ["move_note"] * 4 + ["set_note_text", "set_note_color", "delete_note", "create_link", "create_link", "set_group"]
    if links:
        kinds += ["attach_label", "attach_label", "delete_link", "flip_label"]
    if labels:
        kinds += ["flip_label", "detach_label"]
    if panels:
        kinds += ["move_panel", "resize_panel", "delete_panel"]
    if panels and notes:
        kinds += ["attach_note_to_panel", "detach_note_from_panel"]
    if actor in state.groups:
        kinds += ["move_group", "clear_group"]
    kinds += ["create_panel"]
    kind = rng.choice(kinds)
    pos = lambda: Vec2.of(rng.uniform(-2000, 2000), rng.uniform(-2000, 2000))

    if kind == "create_note":
        return CreateNote(rng.choice(VOCAB), rng.randrange(8), pos())
    if kind == "move_note":
        return MoveNote(rng.choice(notes), pos())
    if kind == "set_note_text":
        return SetNoteText(rng.choice(notes), rng.choice(VOCAB))
    if kind == "set_note_color":
        return SetNoteColor(rng.choice(notes), rng.randrange(8))
    if kind == "delete_note":
        return DeleteNote(rng.choice(notes))
    if kind == "create_link":
        return CreateLink(rng.choice(notes), rng.choice(notes))
    if kind == "attach_label":
        return AttachLabel(rng.choice(links), rng.choice(VOCAB))
    if kind == "delete_link":
        return DeleteLink(rng.choice(links))
    if kind == "flip_label":
        return FlipLabel(rng.choice(labels)) if labels else CreateNote("x", 0, pos())
    if kind == "detach_label":
        return DetachLabel(rng.choice(labels))
    if kind == "set_group":
        members = tuple(rng.sample(notes, k=min(len(notes), rng.randrange(1, 4))))
        return SetGroup(members)
    if kind == "clear_group":
        return ClearGroup()
    if kind == "move_group":
        return MoveGroup(Vec2.of(rng.uniform(-50, 50), rng.uniform(-50, 50)))
    if kind == "create_panel":
        x, y = rng.uniform(-2000, 2000), rng.uniform(-2000, 2000)
        return CreatePanel(Rect.of(x, y, x + rng.uniform(10, 400), y + rng.uniform(10, 400)))
    if kind == "attach_note_to_panel":
        return AttachNoteToPanel(rng.choice(notes), rng.choice(panels))
    if kind == "move_panel":
        return MovePanel(rng.choice(panels), Vec2.of(rng.uniform(-100, 100), rng.uniform(-100, 100)))
    if kind == "resize_panel":
        x, y = rng.uniform(-2000, 2000), rng.uniform(-2000, 2000)
        return ResizePanel(rng.choice(panels), Rect.of(x, y, x + rng.uniform(10, 500), y + rng.uniform(10, 500)))
    if kind == "delete_panel":
        return DeletePanel(rng.choice(panels))
    if kind == "detach_note_from_panel":
        return DetachNoteFromPanel(rng.choice(notes))
    raise AssertionError(kind)


def random_workspace(seed: int, n_ops: int, users=("u1", "u2", "u3")):
    """Evolve a workspace with `n_ops` accepted random ops; returns state+ops."""
    rng = random.Random(seed)
    factories = {u: OpFactory(u) for u in users}
    state = WorkspaceState.empty()
    accepted = []
    applied = 0
    while applied < n_ops:
        user = rng.choice(users)
        payload = random_payload(rng, state, user)
        op = factories[user].op(payload)
        if validate(state, op) is None:
            state, _ = apply(state, op)
            accepted.append(op)
            applied += 1
        else:
            factories[user].seq -= 1  # reuse the seq for the next attempt
    return state, accepted
