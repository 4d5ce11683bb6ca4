"""Metrics engine: cooperation rules, speaking accounting, badge, replay."""
import random

import pytest

from collabmap.engine import apply
from collabmap.gamification import (
    ACTIVITY_WINDOW_MS,
    MAX_UTTERANCE_MS,
    MetricsEngine,
    dashboard,
    replay,
)
from collabmap.geometry import Vec2
from collabmap.model import WorkspaceState
from collabmap.ops import AttachLabel, CreateLink, CreateNote, DeleteNote, MoveNote

from .helpers import OpFactory, fold, random_workspace
from .oracles import brute_force_badge


def build_creators(creators):
    """One note per creator entry; returns (state, note ids, factories)."""
    factories = {}
    state = WorkspaceState.empty()
    ids = []
    for i, creator in enumerate(creators):
        f = factories.setdefault(creator, OpFactory(creator))
        state = fold(state, [f.op(CreateNote(f"n{i}", 0, Vec2(i * 300.0, 0.0)))])
        ids.append(list(state.notes)[-1])
    return state, ids, factories


LINK_CASES = [
    # (source creator, target creator, expected cooperation increment for actor A)
    ("A", "A", 0),
    ("A", "B", 0),
    ("B", "A", 0),
    ("B", "B", 1),
    ("B", "C", 1),
]


@pytest.mark.parametrize("src_creator,dst_creator,expected", LINK_CASES)
def test_cooperation_rule_table_create_link(src_creator, dst_creator, expected):
    state, ids, factories = build_creators([src_creator, dst_creator])
    actor = factories.setdefault("A", OpFactory("A"))
    engine = MetricsEngine(session_start=0)
    op = actor.op(CreateLink(ids[0], ids[1])).with_server_seq(state.applied_seq + 1)
    engine.score_op(state, op, at=1000)
    assert engine.board.user("A").cooperation == expected
    assert engine.board.user("A").artifacts_created == 1  # links always count as output


@pytest.mark.parametrize("link_creator,expected", [("A", 0), ("B", 1)])
def test_cooperation_rule_table_attach_label(link_creator, expected):
    state, ids, factories = build_creators(["C", "C"])
    linker = factories.setdefault(link_creator, OpFactory(link_creator))
    state = fold(state, [linker.op(CreateLink(ids[0], ids[1]))])
    link_id = next(iter(state.links))
    actor = factories.setdefault("A", OpFactory("A"))
    engine = MetricsEngine(session_start=0)
    op = actor.op(AttachLabel(link_id, "verb")).with_server_seq(state.applied_seq + 1)
    engine.score_op(state, op, at=1000)
    assert engine.board.user("A").cooperation == expected
    assert engine.board.user("A").artifacts_created == 1


def test_non_scoring_ops_change_nothing():
    state, ids, factories = build_creators(["A"])
    engine = MetricsEngine(session_start=0)
    actor = factories["A"]
    for payload in (MoveNote(ids[0], Vec2(5.0, 5.0)), DeleteNote(ids[0])):
        op = actor.op(payload).with_server_seq(state.applied_seq + 1)
        events = engine.score_op(state, op, at=1000)
        state, _ = apply(state, op)
        assert events == []
    score = engine.board.user("A")
    assert score.cooperation == 0
    assert score.artifacts_created == 0


# -- speaking accounting -----------------------------------------------------


def test_speaking_simple_interval():
    engine = MetricsEngine(session_start=0)
    engine.record_speaking("u1", True, 0)
    engine.record_speaking("u1", False, 5000)
    assert engine.board.user("u1").speaking_ms == 5000


def test_speaking_duplicate_on_ignored():
    engine = MetricsEngine(session_start=0)
    engine.record_speaking("u1", True, 0)
    engine.record_speaking("u1", True, 1000)
    engine.record_speaking("u1", False, 5000)
    assert engine.board.user("u1").speaking_ms == 5000


def test_speaking_unterminated_capped():
    engine = MetricsEngine(session_start=0)
    engine.record_speaking("u1", True, 0)
    assert engine.board.user("u1").speaking_total(now=120_000) == MAX_UTTERANCE_MS


def test_speaking_terminated_long_interval_also_capped():
    engine = MetricsEngine(session_start=0)
    engine.record_speaking("u1", True, 0)
    engine.record_speaking("u1", False, 120_000)
    assert engine.board.user("u1").speaking_ms == MAX_UTTERANCE_MS


def test_speaking_out_of_order_dropped():
    engine = MetricsEngine(session_start=0)
    engine.record_speaking("u1", True, 10_000)
    engine.record_speaking("u1", False, 4_000)  # stale, dropped
    score = engine.board.user("u1")
    assert score.dropped_signals == 1
    assert score.speaking_since == 10_000
    engine.record_speaking("u1", False, 15_000)
    assert score.speaking_ms == 5000


def test_speaking_never_exceeds_elapsed_session_time():
    engine = MetricsEngine(session_start=0)
    t = 0
    for _ in range(40):
        engine.record_speaking("u1", True, t)
        engine.record_speaking("u1", False, t + 900)
        t += 1000
    assert engine.board.user("u1").speaking_total(t) <= t


# -- efficiency ----------------------------------------------------------------


def test_action_efficiency_artifacts_per_active_minute():
    engine = MetricsEngine(session_start=0)
    score = engine.board.user("u1")
    score.artifacts_created = 12
    score.active_ms_closed = 6 * 60_000
    action, _ = engine.board.efficiency("u1", now=10 * 60_000)
    assert action == 2.0


def test_efficiency_zero_activity():
    engine = MetricsEngine(session_start=0)
    engine.board.user("u1")
    assert engine.board.efficiency("u1", now=60_000) == (0.0, 0.0)


def test_discussion_efficiency_fraction_of_session():
    engine = MetricsEngine(session_start=0)
    engine.record_speaking("u1", True, 0)
    engine.record_speaking("u1", False, 30_000)
    _, discussion = engine.board.efficiency("u1", now=120_000)
    assert discussion == 0.25


def test_activity_window_union():
    engine = MetricsEngine(session_start=0)
    state, ids, factories = build_creators(["u1"])
    f = factories["u1"]
    # Two ops 30s apart extend one window; a third after a gap opens another.
    for at in (0, 30_000, 200_000):
        op = f.op(MoveNote(ids[0], Vec2(1.0, 1.0))).with_server_seq(1)
        engine.score_op(state, op, at=at)
    active = engine.board.user("u1").active_ms(now=300_000)
    assert active == (30_000 + ACTIVITY_WINDOW_MS) + ACTIVITY_WINDOW_MS


# -- badge and events ------------------------------------------------------------


def coop_op(engine, state, factory, source, target, at):
    op = factory.op(CreateLink(source, target)).with_server_seq(state.applied_seq + 1)
    events = engine.score_op(state, op, at)
    new_state, _ = apply(state, op)
    return new_state, events


def test_badge_earliest_to_reach_wins_ties():
    state, ids, factories = build_creators(["C", "C", "C", "C", "C", "C"])
    engine = MetricsEngine(session_start=0)
    a = factories.setdefault("A", OpFactory("A"))
    b = factories.setdefault("B", OpFactory("B"))
    # A cooperates first, then B reaches the same count later: A keeps badge.
    state, ev1 = coop_op(engine, state, a, ids[0], ids[1], 1000)
    assert engine.board.badge_holder == "A"
    assert any(e.kind == "leadership_shift" and e.new_value == "A" for e in ev1)
    state, ev2 = coop_op(engine, state, b, ids[2], ids[3], 2000)
    assert engine.board.badge_holder == "A"  # tie at 1, A reached it first
    assert not any(e.kind == "leadership_shift" for e in ev2)
    state, ev3 = coop_op(engine, state, b, ids[4], ids[5], 3000)
    assert engine.board.badge_holder == "B"  # B pulls ahead
    assert any(e.kind == "leadership_shift" and e.new_value == "B" for e in ev3)


def test_badge_matches_brute_force_after_every_event():
    rng = random.Random(77)
    state, ids, factories = build_creators(["C"] * 30)
    engine = MetricsEngine(session_start=0)
    actors = [factories.setdefault(u, OpFactory(u)) for u in ("A", "B", "D")]
    cooperation = {}
    reached_at = {}
    event_idx = 0
    pool = list(ids)
    rng.shuffle(pool)
    while len(pool) >= 2:
        f = rng.choice(actors)
        s, t = pool.pop(), pool.pop()
        op = f.op(CreateLink(s, t)).with_server_seq(state.applied_seq + 1)
        events = engine.score_op(state, op, at=event_idx * 1000)
        state, _ = apply(state, op)
        event_idx += 1
        if any(e.kind == "score_changed" and e.metric == "cooperation" for e in events):
            cooperation[f.user] = cooperation.get(f.user, 0) + 1
            reached_at[f.user] = event_idx
        assert engine.board.badge_holder == brute_force_badge(cooperation, reached_at)


def test_no_badge_until_first_cooperation():
    engine = MetricsEngine(session_start=0)
    engine.register_user("A", 0)
    engine.register_user("B", 0)
    assert engine.board.badge_holder is None


# -- replay equivalence -------------------------------------------------------


@pytest.mark.parametrize("seed", [5, 6, 7])
def test_replay_reproduces_incremental_board(seed):
    rng = random.Random(seed)
    state, ops = random_workspace(seed, 120, users=("A", "B", "C"))
    engine = MetricsEngine(session_start=0)
    for u in ("A", "B", "C"):
        engine.register_user(u, 0)
    folded = WorkspaceState.empty()
    at = 0
    for op in ops:
        at += rng.randrange(1, 2000)
        if rng.random() < 0.15:
            engine.record_speaking(rng.choice(("A", "B", "C")), rng.random() < 0.5, at)
        sequenced = op.with_server_seq(folded.applied_seq + 1)
        engine.score_op(folded, sequenced, at)
        folded, _ = apply(folded, sequenced)
    now = at + 1000
    replayed = replay(0, WorkspaceState.empty(), engine.log)
    assert replayed.to_wire(now) == engine.board.to_wire(now)
    assert replayed.badge_holder == engine.board.badge_holder


# -- dashboard ------------------------------------------------------------------


def test_dashboard_all_zero_bars():
    engine = MetricsEngine(session_start=0)
    engine.register_user("A", 0)
    model = dashboard(engine.board, now=1000)
    for group in model["groups"]:
        assert all(bar["length"] == 0.0 for bar in group["bars"])


def test_dashboard_normalizes_to_maximum():
    engine = MetricsEngine(session_start=0)
    engine.board.user("A").cooperation = 2
    engine.board.user("B").cooperation = 4
    model = dashboard(engine.board, now=1000, colors={"A": 0, "B": 1})
    coop = [g for g in model["groups"] if g["measure"] == "cooperation"][0]
    lengths = {bar["user"]: bar["length"] for bar in coop["bars"]}
    assert lengths == {"A": 0.5, "B": 1.0}
    colors = {bar["user"]: bar["color"] for bar in coop["bars"]}
    assert colors == {"A": 0, "B": 1}


def test_dashboard_single_user_full_bar():
    engine = MetricsEngine(session_start=0)
    engine.board.user("A").cooperation = 3
    model = dashboard(engine.board, now=1000)
    coop = [g for g in model["groups"] if g["measure"] == "cooperation"][0]
    assert coop["bars"][0]["length"] == 1.0
