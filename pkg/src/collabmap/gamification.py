"""Incremental metrics engine: cooperation, speaking time, efficiency, badge.

Consumes the room's serialized accepted-op stream plus speaking signals and
keeps per-user counters. Cooperation counts two behaviours: linking two
notes created by other users, and labelling a link created by another user.
Artifact creation counts notes, links, and labels. The badge follows the
cooperation leader, ties broken by who reached the value first.

Folding the engine from scratch over the recorded event log reproduces the
incremental scoreboard exactly; the harness asserts this equivalence.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .model import UserId, WorkspaceState
from .ops import CREATION_KINDS, Operation

# An unterminated speaking interval is credited at most this long, so a
# crashed client cannot accrue speaking time forever.
MAX_UTTERANCE_MS = 30_000

# A user counts as active for this long after each accepted op or speaking
# signal; action efficiency divides artifacts by accumulated active time.
ACTIVITY_WINDOW_MS = 60_000


@dataclass
class UserScore:
    cooperation: int = 0
    speaking_ms: int = 0
    artifacts_created: int = 0
    # Event index at which the current cooperation value was reached.
    cooperation_reached_at: int = 0
    # Open speaking interval start, or None when not speaking.
    speaking_since: int | None = None
    # Activity clock: closed window time plus the currently open window.
    active_ms_closed: int = 0
    window_start: int | None = None
    window_end: int | None = None
    dropped_signals: int = 0
    last_signal_at: int | None = None

    def active_ms(self, now: int) -> int:
        total = self.active_ms_closed
        if self.window_start is not None and now > self.window_start:
            total += min(now, self.window_end) - self.window_start
        return total

    def speaking_total(self, now: int) -> int:
        total = self.speaking_ms
        if self.speaking_since is not None and now > self.speaking_since:
            total += min(now - self.speaking_since, MAX_UTTERANCE_MS)
        return total


@dataclass(frozen=True)
class ScoreEvent:
    kind: str  # score_changed | leadership_shift
    user: UserId
    metric: str
    old_value: object
    new_value: object


@dataclass
class Scoreboard:
    session_start: int
    users: dict = field(default_factory=dict)
    badge_holder: UserId | None = None

    def user(self, user_id: UserId) -> UserScore:
        score = self.users.get(user_id)
        if score is None:
            score = UserScore()
            self.users[user_id] = score
        return score

    def efficiency(self, user_id: UserId, now: int) -> tuple[float, float]:
        """(artifacts per active minute, fraction of session spent speaking)."""
        score = self.users.get(user_id, UserScore())
        active = score.active_ms(now)
        action = score.artifacts_created / (active / 60_000.0) if active > 0 else 0.0
        elapsed = now - self.session_start
        discussion = min(1.0, score.speaking_total(now) / elapsed) if elapsed > 0 else 0.0
        return action, discussion

    def to_wire(self, now: int) -> dict:
        return {
            "session_start": self.session_start,
            "badge_holder": self.badge_holder,
            "users": {
                uid: {
                    "cooperation": s.cooperation,
                    "speaking_ms": s.speaking_total(now),
                    "artifacts_created": s.artifacts_created,
                    "active_ms": s.active_ms(now),
                    "action_efficiency": self.efficiency(uid, now)[0],
                    "discussion_efficiency": self.efficiency(uid, now)[1],
                }
                for uid, s in self.users.items()
            },
        }


class MetricsEngine:
    """Folds ops and speaking signals into a scoreboard, emitting events."""

    def __init__(self, session_start: int):
        self.board = Scoreboard(session_start=session_start)
        self.event_index = 0
        self.log: list[dict] = []

    # -- input stream ------------------------------------------------------

    def register_user(self, user: UserId, at: int) -> None:
        self.board.user(user)
        self.log.append({"kind": "join", "user": user, "at": at})

    def score_op(self, state_before: WorkspaceState, op: Operation, at: int) -> list[ScoreEvent]:
        """Score one accepted operation against the state it was applied to."""
        self.event_index += 1
        self.log.append({"kind": "op", "op": op, "at": at})
        events: list[ScoreEvent] = []
        score = self.board.user(op.actor)
        self._touch_activity(score, at)

        if op.payload.kind in CREATION_KINDS:
            old = score.artifacts_created
            score.artifacts_created += 1
            events.append(ScoreEvent("score_changed", op.actor, "artifacts_created", old, score.artifacts_created))

        if self._is_cooperation(state_before, op):
            old = score.cooperation
            score.cooperation += 1
            score.cooperation_reached_at = self.event_index
            events.append(ScoreEvent("score_changed", op.actor, "cooperation", old, score.cooperation))
            shift = self._update_badge()
            if shift is not None:
                events.append(shift)
        return events

    def record_speaking(self, user: UserId, signal: bool, at: int) -> Scoreboard:
        """Fold one speaking on/off signal; out-of-order signals are dropped."""
        self.log.append({"kind": "speaking", "user": user, "on": signal, "at": at})
        score = self.board.user(user)
        if score.last_signal_at is not None and at < score.last_signal_at:
            score.dropped_signals += 1
            return self.board
        score.last_signal_at = at
        currently_on = score.speaking_since is not None
        if signal == currently_on:
            return self.board  # repeated identical signal
        self._touch_activity(score, at)
        if signal:
            score.speaking_since = at
        else:
            score.speaking_ms += min(at - score.speaking_since, MAX_UTTERANCE_MS)
            score.speaking_since = None
        return self.board

    # -- internals ---------------------------------------------------------

    @staticmethod
    def _is_cooperation(state: WorkspaceState, op: Operation) -> bool:
        p = op.payload
        if p.kind == "create_link":
            source = state.notes[p.source]
            target = state.notes[p.target]
            return source.creator != op.actor and target.creator != op.actor
        if p.kind == "attach_label":
            return state.links[p.link].creator != op.actor
        return False

    def _touch_activity(self, score: UserScore, at: int) -> None:
        if score.window_start is None:
            score.window_start, score.window_end = at, at + ACTIVITY_WINDOW_MS
        elif at <= score.window_end:
            score.window_end = at + ACTIVITY_WINDOW_MS
        else:
            score.active_ms_closed += score.window_end - score.window_start
            score.window_start, score.window_end = at, at + ACTIVITY_WINDOW_MS

    def _update_badge(self) -> ScoreEvent | None:
        best: tuple[int, int, str] | None = None
        holder: UserId | None = None
        for uid, score in self.board.users.items():
            if score.cooperation <= 0:
                continue
            key = (-score.cooperation, score.cooperation_reached_at, uid)
            if best is None or key < best:
                best = key
                holder = uid
        if holder != self.board.badge_holder:
            old = self.board.badge_holder
            self.board.badge_holder = holder
            return ScoreEvent("leadership_shift", holder or "", "badge", old, holder)
        return None


def replay(session_start: int, initial_state: WorkspaceState, log: list[dict]) -> Scoreboard:
    """Rebuild a scoreboard from scratch by re-folding the recorded log.

    Re-applies each logged accepted op to reconstruct the state it was
    scored against; the result must equal the incremental scoreboard.
    """
    from .engine import apply  # imported here: engine depends on ops only

    engine = MetricsEngine(session_start)
    state = initial_state
    for entry in log:
        if entry["kind"] == "join":
            engine.register_user(entry["user"], entry["at"])
        elif entry["kind"] == "op":
            op = entry["op"]
            engine.score_op(state, op, entry["at"])
            state, _ = apply(state, op)
        elif entry["kind"] == "speaking":
            engine.record_speaking(entry["user"], entry["on"], entry["at"])
    return engine.board


def dashboard(board: Scoreboard, now: int, colors: dict | None = None) -> dict:
    """Bar-chart model: one group per measure, bars normalized to the max."""
    colors = colors or {}
    measures = {
        "cooperation": {uid: float(s.cooperation) for uid, s in board.users.items()},
        "speaking_ms": {uid: float(s.speaking_total(now)) for uid, s in board.users.items()},
        "action_efficiency": {uid: board.efficiency(uid, now)[0] for uid in board.users},
        "discussion_efficiency": {uid: board.efficiency(uid, now)[1] for uid in board.users},
    }
    groups = []
    for measure, values in measures.items():
        top = max(values.values(), default=0.0)
        bars = [
            {
                "user": uid,
                "value": value,
                "length": (value / top) if top > 0 else 0.0,
                "color": colors.get(uid, 0),
            }
            for uid, value in values.items()
        ]
        groups.append({"measure": measure, "bars": bars})
    return {"groups": groups, "badge_holder": board.badge_holder}
