"""Per-room sequencer: server-authoritative total order over operations.

Exactly one logical writer folds operations into the room state. Accepted
ops get a gap-free, strictly increasing server_seq; rejected ops leave the
state untouched. Resubmissions of an already-seen (client_id, client_seq)
are answered with the original verdict and never re-applied. A bounded
in-memory op log serves reconnection catch-up; beyond it, clients get a
full snapshot.
"""
from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field

from .engine import RejectReason, StateEvent, apply, validate
from .gamification import MetricsEngine, ScoreEvent
from .model import WorkspaceState, integrity_errors, panel_consistency_errors
from .ops import Operation

DEFAULT_RETENTION = 10_000


def wall_clock_ms() -> int:
    return int(time.time() * 1000)


class CheckedModeViolation(AssertionError):
    """An accepted op broke an invariant; only possible via an engine bug."""


@dataclass
class SequenceOutcome:
    accepted: bool
    op: Operation | None = None  # carries server_seq when accepted
    reason: RejectReason | None = None
    duplicate: bool = False  # verdict replayed for a stale client_seq
    events: list = field(default_factory=list)
    score_events: list = field(default_factory=list)


class Room:
    def __init__(
        self,
        room_id: str,
        clipboard: list | None = None,
        initial_state: WorkspaceState | None = None,
        clock=wall_clock_ms,
        gamification_enabled: bool = True,
        retention: int = DEFAULT_RETENTION,
        checked: bool = False,
    ):
        self.room_id = room_id
        self.clock = clock
        self.gamification_enabled = gamification_enabled
        self.checked = checked
        if initial_state is not None:
            self.state = initial_state
        else:
            self.state = WorkspaceState.empty(clipboard=clipboard)
        # Kept for from-scratch metric replays over the session log.
        self.session_initial_state = self.state.shallow_copy()
        self.op_log: deque = deque(maxlen=retention)
        self.last_seen: dict = {}  # client_id -> last client_seq
        self.verdicts: dict = {}  # (client_id, client_seq) -> SequenceOutcome
        self.metrics = MetricsEngine(session_start=clock())
        self.user_counter = 0
        self.color_assignments = 0

    # -- sequencing ---------------------------------------------------------

    def sequence(self, op: Operation) -> SequenceOutcome:
        last = self.last_seen.get(op.client_id, 0)
        if op.client_seq <= last:
            stored = self.verdicts.get(op.op_id)
            if stored is not None:
                return SequenceOutcome(
                    accepted=stored.accepted,
                    op=stored.op,
                    reason=stored.reason,
                    duplicate=True,
                )
            # Seen but verdict evicted is impossible here: verdicts are kept
            # for the room lifetime. Treat as a gap to force a resync.
            return SequenceOutcome(accepted=False, reason=RejectReason.SEQUENCE_GAP)
        if op.client_seq > last + 1:
            # Transient: not recorded, the client must resynchronize.
            return SequenceOutcome(accepted=False, reason=RejectReason.SEQUENCE_GAP)

        reason = validate(self.state, op)
        if reason is not None:
            outcome = SequenceOutcome(accepted=False, reason=reason)
        else:
            sequenced = op.with_server_seq(self.state.applied_seq + 1)
            state_before = self.state
            new_state, events = apply(self.state, sequenced)
            if self.checked:
                violations = integrity_errors(new_state) + panel_consistency_errors(new_state)
                if violations:
                    raise CheckedModeViolation(
                        f"op {sequenced.payload.kind} seq {sequenced.server_seq}: " + "; ".join(violations)
                    )
            self.state = new_state
            score_events: list[ScoreEvent] = []
            if self.gamification_enabled:
                score_events = self.metrics.score_op(state_before, sequenced, self.clock())
            self.op_log.append(sequenced)
            outcome = SequenceOutcome(accepted=True, op=sequenced, events=events, score_events=score_events)
        self.last_seen[op.client_id] = op.client_seq
        self.verdicts[op.op_id] = outcome
        return outcome

    # -- reconnection -------------------------------------------------------

    def catch_up(self, resume_from_seq: int):
        """('replay', missing ops) when retained, else ('snapshot', state)."""
        current = self.state.applied_seq
        if resume_from_seq >= current:
            return ("replay", [])
        if self.op_log and resume_from_seq >= self.op_log[0].server_seq - 1:
            return ("replay", [op for op in self.op_log if op.server_seq > resume_from_seq])
        return ("snapshot", self.state)

    # -- membership helpers -------------------------------------------------

    def next_user_id(self) -> str:
        self.user_counter += 1
        return f"u{self.user_counter}"

    def assign_color(self, in_use: set, palette_size: int) -> int:
        free = [c for c in range(palette_size) if c not in in_use]
        if free:
            return free[0]
        color = self.color_assignments % palette_size
        self.color_assignments += 1
        return color

    def record_speaking(self, user: str, on: bool) -> None:
        if self.gamification_enabled:
            self.metrics.record_speaking(user, on, self.clock())

    def register_user(self, user: str) -> None:
        if self.gamification_enabled:
            self.metrics.register_user(user, self.clock())
