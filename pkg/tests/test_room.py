"""Sequencer semantics: total order, idempotence, gaps, catch-up."""
import pytest

from collabmap.engine import RejectReason
from collabmap.geometry import Vec2
from collabmap.ops import CreateLink, CreateNote, DeleteNote, MoveNote, Operation
from collabmap.room import Room
from collabmap.snapshot import snapshot


def make_room(**kwargs):
    kwargs.setdefault("clock", lambda: 0)
    return Room("r", **kwargs)


def op(user, seq, payload):
    return Operation(user, seq, user, 0, payload)


def test_first_op_gets_server_seq_one():
    room = make_room()
    outcome = room.sequence(op("u1", 1, CreateNote("a", 0, Vec2(0, 0))))
    assert outcome.accepted
    assert outcome.op.server_seq == 1
    assert room.state.applied_seq == 1


def test_server_seq_is_gap_free_over_accepts():
    room = make_room()
    seqs = []
    room.sequence(op("u1", 1, CreateNote("a", 0, Vec2(0, 0))))
    a = next(iter(room.state.notes))
    # A rejected op must not consume a server seq.
    room.sequence(op("u1", 2, CreateLink(a, a)))
    outcome = room.sequence(op("u1", 3, CreateNote("b", 0, Vec2(200, 0))))
    assert outcome.op.server_seq == 2
    assert room.state.applied_seq == 2


def test_resubmission_of_accepted_op_is_idempotent():
    room = make_room()
    first = room.sequence(op("u1", 1, CreateNote("a", 0, Vec2(0, 0))))
    frozen = snapshot(room.state)
    again = room.sequence(op("u1", 1, CreateNote("a", 0, Vec2(0, 0))))
    assert again.accepted and again.duplicate
    assert again.op.server_seq == first.op.server_seq
    assert snapshot(room.state) == frozen  # state unchanged


def test_resubmission_of_rejected_op_returns_same_verdict():
    room = make_room()
    rejected = room.sequence(op("u1", 1, DeleteNote("note:none:1")))
    assert rejected.reason is RejectReason.UNKNOWN_TARGET
    again = room.sequence(op("u1", 1, DeleteNote("note:none:1")))
    assert again.duplicate
    assert again.reason is RejectReason.UNKNOWN_TARGET


def test_client_seq_gap_rejected_and_not_recorded():
    room = make_room()
    gap = room.sequence(op("u1", 5, CreateNote("a", 0, Vec2(0, 0))))
    assert not gap.accepted
    assert gap.reason is RejectReason.SEQUENCE_GAP
    # The skipped seqs were never seen; submitting in order now succeeds.
    ok = room.sequence(op("u1", 1, CreateNote("a", 0, Vec2(0, 0))))
    assert ok.accepted


def test_rejected_op_consumes_client_seq():
    room = make_room()
    room.sequence(op("u1", 1, DeleteNote("note:none:1")))
    ok = room.sequence(op("u1", 2, CreateNote("a", 0, Vec2(0, 0))))
    assert ok.accepted


def test_concurrent_duplicate_links_one_winner():
    room = make_room()
    room.sequence(op("u1", 1, CreateNote("a", 0, Vec2(0, 0))))
    room.sequence(op("u1", 2, CreateNote("b", 0, Vec2(300, 0))))
    a, b = list(room.state.notes)
    # Both clients submit the same link before seeing each other's echo.
    first = room.sequence(op("u1", 3, CreateLink(a, b)))
    second = room.sequence(op("u2", 1, CreateLink(b, a)))
    assert first.accepted
    assert not second.accepted
    assert second.reason is RejectReason.DUPLICATE_LINK
    assert len(room.state.links) == 1


def test_move_after_delete_rejected_no_resurrection():
    room = make_room()
    room.sequence(op("u1", 1, CreateNote("a", 0, Vec2(0, 0))))
    a = next(iter(room.state.notes))
    room.sequence(op("u2", 1, DeleteNote(a)))
    outcome = room.sequence(op("u1", 2, MoveNote(a, Vec2(50, 50))))
    assert not outcome.accepted
    assert outcome.reason is RejectReason.UNKNOWN_TARGET
    assert a not in room.state.notes


def test_catch_up_empty_replay_at_current():
    room = make_room()
    room.sequence(op("u1", 1, CreateNote("a", 0, Vec2(0, 0))))
    mode, ops = room.catch_up(room.state.applied_seq)
    assert mode == "replay"
    assert ops == []


def test_catch_up_returns_exact_missing_suffix():
    room = make_room()
    for i in range(1, 11):
        room.sequence(op("u1", i, CreateNote(f"n{i}", 0, Vec2(i * 200.0, 0))))
    mode, ops = room.catch_up(room.state.applied_seq - 3)
    assert mode == "replay"
    assert [o.server_seq for o in ops] == [8, 9, 10]


def test_catch_up_beyond_retention_falls_back_to_snapshot():
    room = make_room(retention=5)
    for i in range(1, 21):
        room.sequence(op("u1", i, CreateNote(f"n{i}", 0, Vec2(i * 200.0, 0))))
    mode, payload = room.catch_up(2)
    assert mode == "snapshot"
    assert snapshot(payload) == snapshot(room.state)
    # Within the retained window a replay is still served.
    mode, ops = room.catch_up(room.state.applied_seq - 2)
    assert mode == "replay"
    assert len(ops) == 2


def test_checked_mode_accepts_valid_runs():
    room = make_room(checked=True)
    room.sequence(op("u1", 1, CreateNote("a", 0, Vec2(0, 0))))
    room.sequence(op("u1", 2, CreateNote("b", 0, Vec2(300, 0))))
    a, b = list(room.state.notes)
    room.sequence(op("u1", 3, CreateLink(a, b)))
    room.sequence(op("u1", 4, DeleteNote(a)))
    assert room.state.applied_seq == 4
