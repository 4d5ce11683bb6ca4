#!/usr/bin/env python3
"""Generate the frontend replica-convergence fixture.

Drives the room host through a scripted sequence covering every payload
kind (including cascade and panel-refit edge cases) plus a seeded random
tail, then records the ordered broadcasts and the server's canonical
snapshot. The frontend test folds the broadcasts into its replica and must
reproduce the snapshot byte for byte.

Usage: python3 tools/gen_frontend_fixture.py [output.json]
"""
import json
import random
import sys
from pathlib import Path

from collabmap.geometry import Rect, Vec2
from collabmap.model import ClipboardItem, ClipboardKind
from collabmap.ops import (
    AttachLabel, AttachNoteToPanel, ClearGroup, CreateLink, CreateNote,
    CreatePanel, DeleteLink, DeleteNote, DeletePanel, DetachLabel,
    DetachNoteFromPanel, FlipLabel, MoveGroup, MoveNote, MovePanel,
    Operation, ResizePanel, SetGroup, SetNoteColor, SetNoteText,
)
from collabmap.protocol import Hello, SubmitOp
from collabmap.room import Room
from collabmap.service import RoomHost
from collabmap.simharness import OpGenerator, DEFAULT_OP_MIX, VirtualClock
from collabmap.snapshot import snapshot, state_to_doc

CLIPBOARD = [
    ClipboardItem("clip:0", "water cycle", ClipboardKind.NOTE_SOURCE),
    ClipboardItem("clip:1", "causes", ClipboardKind.LABEL_SOURCE),
    ClipboardItem("clip:2", "rain", ClipboardKind.NOTE_SOURCE),
]


def main() -> int:
    out_path = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("frontend/tests/fixtures/replica_fixture.json")
    clock = VirtualClock()
    host = RoomHost(lambda rid: Room(rid, clipboard=list(CLIPBOARD), clock=clock), clock=clock)

    broadcasts = []
    users = {}
    seqs = {}

    def join(conn, name):
        outbox = host.handle(conn, Hello("fixture", name, None))
        for cid, msg in outbox:
            if cid == conn and msg["type"] == "welcome":
                users[conn] = msg["your_user_id"]
        seqs[conn] = 0
        return [m for cid, m in outbox if cid == conn and m["type"] == "welcome"][0]

    def submit(conn, payload, expect_accept=True):
        seqs[conn] += 1
        uid = users[conn]
        op = Operation(uid, seqs[conn], uid, clock.now, payload)
        outbox = host.handle(conn, SubmitOp(op))
        clock.advance(7)
        accepted = any(m["type"] == "op_accepted" for cid, m in outbox if cid == conn)
        if expect_accept and not accepted:
            rejection = [m for cid, m in outbox if m["type"] == "op_rejected"]
            raise SystemExit(f"fixture op unexpectedly rejected: {payload.kind}: {rejection}")
        for cid, msg in outbox:
            if cid == conn and msg["type"] == "op_broadcast":
                broadcasts.append(msg["op"])
        return f"note:{uid}:{seqs[conn]}", f"link:{uid}:{seqs[conn]}", f"label:{uid}:{seqs[conn]}", f"panel:{uid}:{seqs[conn]}"

    welcome = join("c1", "ada")
    join("c2", "lin")

    # Scripted coverage of every payload kind and the tricky rules.
    n1, _, _, _ = submit("c1", CreateNote("water cycle", 0, Vec2(0.0, 0.0), from_clipboard="clip:0"))
    n2, _, _, _ = submit("c2", CreateNote("rain", 3, Vec2(400.5, -120.25), from_clipboard=None))
    n3, _, _, _ = submit("c1", CreateNote("ocean", 5, Vec2(-300.0, 220.0)))
    submit("c1", SetNoteText(n3, "deep ocean"))
    submit("c2", SetNoteColor(n2, 6))
    submit("c1", MoveNote(n1, Vec2(33.3333, 44.4444)))

    _, l1, _, _ = submit("c1", CreateLink(n1, n2))
    _, l2, _, _ = submit("c2", CreateLink(n2, n3))
    _, _, b1, _ = submit("c2", AttachLabel(l1, "causes", from_clipboard="clip:1"))
    _, _, b2, _ = submit("c1", AttachLabel(l1, "feeds"))
    submit("c1", FlipLabel(b1))
    submit("c2", DetachLabel(b2))

    _, _, _, p1 = submit("c1", CreatePanel(Rect.of(600, 600, 800, 760)))
    _, _, _, p2 = submit("c2", CreatePanel(Rect.of(-900, -900, -500, -640)))
    submit("c1", AttachNoteToPanel(n1, p1))
    submit("c2", AttachNoteToPanel(n2, p1))  # second note refits the panel
    submit("c1", ResizePanel(p1, Rect.of(-150, -250, 900, 900)))  # manual resize
    submit("c1", MoveNote(n1, Vec2(1200.0, 1200.0)))  # forces union growth of a manual panel
    submit("c2", AttachNoteToPanel(n2, p2))  # re-attach moves between panels
    submit("c1", MovePanel(p2, Vec2(50.5, -25.25)))  # carries its notes
    submit("c1", DetachNoteFromPanel(n1))

    submit("c2", SetGroup((n2, n3)))
    submit("c2", MoveGroup(Vec2(10.0, 10.0)))
    submit("c1", SetGroup((n1,)))
    submit("c1", ClearGroup())

    n4, _, _, _ = submit("c2", CreateNote("temp", 1, Vec2(50.0, 900.0)))
    _, l4, _, _ = submit("c1", CreateLink(n4, n3))
    submit("c1", AttachLabel(l4, "loops"))
    submit("c2", DeleteNote(n4))  # cascades the link and its label
    submit("c1", DeleteLink(l1))
    submit("c2", DeletePanel(p2))  # detaches n2

    # Random tail for breadth; everything flows through the same host.
    generator = OpGenerator(random.Random(2024), dict(DEFAULT_OP_MIX), stale_fraction=0.0)
    accepted = 0
    while accepted < 120:
        conn = "c1" if accepted % 2 == 0 else "c2"
        payload = generator.next_payload(host.rooms["fixture"].room.state, users[conn])
        seqs[conn] += 1
        uid = users[conn]
        op = Operation(uid, seqs[conn], uid, clock.now, payload)
        outbox = host.handle(conn, SubmitOp(op))
        clock.advance(3)
        if any(m["type"] == "op_accepted" for cid, m in outbox if cid == conn):
            accepted += 1
            for cid, msg in outbox:
                if cid == conn and msg["type"] == "op_broadcast":
                    broadcasts.append(msg["op"])

    room = host.rooms["fixture"].room
    fixture = {
        "initial_snapshot": welcome["snapshot"],
        "clipboard": welcome["clipboard"],
        "broadcast_ops": broadcasts,
        "final_snapshot": snapshot(room.state).decode("utf-8"),
        "op_count": len(broadcasts),
    }
    assert json.dumps(state_to_doc(room.state), sort_keys=True)  # sanity: serializable
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(json.dumps(fixture, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {out_path}: {len(broadcasts)} ops, final seq {room.state.applied_seq}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
