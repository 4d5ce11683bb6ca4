"""Headless multi-client simulator and convergence checker.

Scripted, seed-driven agents exercise the full protocol against a room host
— in-process with a virtual clock (fully deterministic) or over a real
websocket connection (loopback mode, convergence assertions only). At
quiescence the harness asserts that every replica's snapshot is
byte-identical to the server's, that referential integrity and panel
consistency hold, that the scoreboard equals a from-scratch replay of the
logs, and that clone derivations match a naive scan.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import random
import sys
import time
from collections import deque
from dataclasses import dataclass, field

from .awareness import clone_targets, normalize_text
from .engine import apply
from .gamification import replay
from .geometry import Rect, Vec2
from .model import (
    ClipboardItem,
    ClipboardKind,
    WorkspaceState,
    integrity_errors,
    panel_consistency_errors,
)
from .ops import (
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
    op_from_wire,
    op_to_wire,
)
from .protocol import Hello, Ping, PresenceUpdate, Speaking, SubmitOp
from .room import Room
from .service import RoomHost
from .snapshot import canonical_bytes, restore, snapshot, state_to_doc

logger = logging.getLogger(__name__)

DEFAULT_OP_MIX = {
    "create_note": 20,
    "set_note_text": 5,
    "set_note_color": 3,
    "move_note": 18,
    "delete_note": 7,
    "create_link": 12,
    "delete_link": 3,
    "attach_label": 8,
    "detach_label": 2,
    "flip_label": 3,
    "set_group": 4,
    "clear_group": 1,
    "move_group": 3,
    "create_panel": 3,
    "move_panel": 2,
    "resize_panel": 2,
    "delete_panel": 1,
    "attach_note_to_panel": 4,
    "detach_note_from_panel": 2,
}

ALL_ASSERTIONS = ("convergence", "integrity", "score_replay", "clone_oracle")

VOCAB = (
    "water", "cycle", "rain", "cloud", "river", "ocean", "soil", "sun",
    "wind", "storm", "Water", "RAIN", "evaporation", "condensation",
)

DEFAULT_CLIPBOARD = [
    ClipboardItem(f"clip:{i}", text, ClipboardKind.NOTE_SOURCE if i % 3 else ClipboardKind.LABEL_SOURCE)
    for i, text in enumerate(("causes", "water", "rain", "feeds", "cloud", "river"))
]


@dataclass(frozen=True)
class Disturbance:
    agent: int
    disconnect_at: int  # agent turn index at which the connection drops
    reconnect_at: int  # agent turn index at which it rejoins with resume


@dataclass
class Scenario:
    seed: int = 42
    agents: int = 4
    ops_per_agent: int = 200
    op_mix: dict = field(default_factory=lambda: dict(DEFAULT_OP_MIX))
    stale_fraction: float = 0.05
    speaking_fraction: float = 0.05
    resubmit_fraction: float = 0.02
    disturbances: list = field(default_factory=list)
    assertions: tuple = ALL_ASSERTIONS
    gamification: bool = True
    checked: bool = False
    room: str = "sim"

    @staticmethod
    def from_doc(doc: dict) -> "Scenario":
        scenario = Scenario()
        for key in (
            "seed", "agents", "ops_per_agent", "stale_fraction", "speaking_fraction",
            "resubmit_fraction", "gamification", "checked", "room",
        ):
            if key in doc:
                setattr(scenario, key, doc[key])
        if "op_mix" in doc:
            scenario.op_mix = dict(doc["op_mix"])
        if "assertions" in doc:
            scenario.assertions = tuple(doc["assertions"])
        if "disturbances" in doc:
            scenario.disturbances = [
                Disturbance(d["agent"], d["disconnect_at"], d["reconnect_at"]) for d in doc["disturbances"]
            ]
        return scenario

    @staticmethod
    def load(path: str) -> "Scenario":
        with open(path, "r", encoding="utf-8") as fh:
            return Scenario.from_doc(json.load(fh))

    def to_doc(self) -> dict:
        return {
            "seed": self.seed,
            "agents": self.agents,
            "ops_per_agent": self.ops_per_agent,
            "op_mix": self.op_mix,
            "stale_fraction": self.stale_fraction,
            "speaking_fraction": self.speaking_fraction,
            "resubmit_fraction": self.resubmit_fraction,
            "disturbances": [
                {"agent": d.agent, "disconnect_at": d.disconnect_at, "reconnect_at": d.reconnect_at}
                for d in self.disturbances
            ],
            "assertions": list(self.assertions),
            "gamification": self.gamification,
            "checked": self.checked,
            "room": self.room,
        }


class VirtualClock:
    """Monotone millisecond clock advanced explicitly by the scheduler."""

    def __init__(self, start_ms: int = 1_000_000):
        self.now = start_ms

    def __call__(self) -> int:
        return self.now

    def advance(self, ms: int) -> None:
        self.now += ms


class OpGenerator:
    """Produces mostly-valid payloads from a replica, plus deliberate
    stale references and duplicate links to exercise the rejection paths."""

    def __init__(self, rng: random.Random, mix: dict, stale_fraction: float):
        self.rng = rng
        self.mix = {k: w for k, w in mix.items() if w > 0}
        self.stale_fraction = stale_fraction
        self.dead_ids: deque = deque(maxlen=64)

    def note_id(self, state: WorkspaceState) -> str | None:
        notes = list(state.notes)
        if notes and (not self.dead_ids or self.rng.random() >= self.stale_fraction):
            return self.rng.choice(notes)
        if self.dead_ids:
            return self.rng.choice(list(self.dead_ids))
        return self.rng.choice(notes) if notes else None

    def next_payload(self, state: WorkspaceState, user: str):
        kinds = list(self.mix)
        weights = [self.mix[k] for k in kinds]
        for _ in range(12):
            kind = self.rng.choices(kinds, weights)[0]
            payload = self._build(kind, state, user)
            if payload is not None:
                return payload
        return CreateNote(self.rng.choice(VOCAB), self.rng.randrange(8), self._pos())

    def _pos(self) -> Vec2:
        return Vec2.of(self.rng.uniform(-3000, 3000), self.rng.uniform(-3000, 3000))

    def _rect(self, size: float = 400) -> Rect:
        x = self.rng.uniform(-3000, 3000)
        y = self.rng.uniform(-3000, 3000)
        return Rect.of(x, y, x + self.rng.uniform(50, size), y + self.rng.uniform(50, size))

    def _build(self, kind: str, state: WorkspaceState, user: str):
        rng = self.rng
        notes = list(state.notes)
        links = list(state.links)
        labels = list(state.labels)
        panels = list(state.panels)

        if kind == "create_note":
            if rng.random() < 0.2:
                sources = [c for c in state.clipboard if c.kind == ClipboardKind.NOTE_SOURCE]
                if sources:
                    item = rng.choice(sources)
                    return CreateNote(item.text, rng.randrange(8), self._pos(), from_clipboard=item.id)
            return CreateNote(rng.choice(VOCAB), rng.randrange(8), self._pos())
        if kind == "set_note_text":
            nid = self.note_id(state)
            return SetNoteText(nid, rng.choice(VOCAB)) if nid else None
        if kind == "set_note_color":
            nid = self.note_id(state)
            return SetNoteColor(nid, rng.randrange(8)) if nid else None
        if kind == "move_note":
            nid = self.note_id(state)
            return MoveNote(nid, self._pos()) if nid else None
        if kind == "delete_note":
            nid = self.note_id(state)
            return DeleteNote(nid) if nid else None
        if kind == "create_link":
            if len(notes) < 2:
                return None
            if links and rng.random() < self.stale_fraction:
                link = state.links[rng.choice(links)]  # deliberate duplicate
                return CreateLink(link.source, link.target)
            a, b = rng.sample(notes, 2)
            return CreateLink(a, b)
        if kind == "delete_link":
            return DeleteLink(rng.choice(links)) if links else None
        if kind == "attach_label":
            if not links:
                return None
            if rng.random() < 0.2:
                sources = [c for c in state.clipboard if c.kind == ClipboardKind.LABEL_SOURCE]
                if sources:
                    item = rng.choice(sources)
                    return AttachLabel(rng.choice(links), item.text, from_clipboard=item.id)
            return AttachLabel(rng.choice(links), rng.choice(VOCAB))
        if kind == "detach_label":
            return DetachLabel(rng.choice(labels)) if labels else None
        if kind == "flip_label":
            return FlipLabel(rng.choice(labels)) if labels else None
        if kind == "set_group":
            if not notes:
                return None
            members = rng.sample(notes, k=min(len(notes), rng.randrange(1, 5)))
            return SetGroup(tuple(members))
        if kind == "clear_group":
            return ClearGroup()
        if kind == "move_group":
            if user not in state.groups:
                return None
            return MoveGroup(Vec2.of(rng.uniform(-80, 80), rng.uniform(-80, 80)))
        if kind == "create_panel":
            return CreatePanel(self._rect())
        if kind == "move_panel":
            if not panels:
                return None
            return MovePanel(rng.choice(panels), Vec2.of(rng.uniform(-80, 80), rng.uniform(-80, 80)))
        if kind == "resize_panel":
            return ResizePanel(rng.choice(panels), self._rect(800)) if panels else None
        if kind == "delete_panel":
            return DeletePanel(rng.choice(panels)) if panels else None
        if kind == "attach_note_to_panel":
            if not panels or not notes:
                return None
            return AttachNoteToPanel(rng.choice(notes), rng.choice(panels))
        if kind == "detach_note_from_panel":
            attached = [n for n in state.notes.values() if n.panel is not None]
            return DetachNoteFromPanel(rng.choice(attached).id) if attached else None
        return None


class Agent:
    """One simulated client: a protocol-faithful replica plus an op source."""

    def __init__(self, index: int, generator: OpGenerator, quota: int):
        self.index = index
        self.conn_id = f"agent-{index}"
        self.name = f"agent{index}"
        self.generator = generator
        self.quota = quota
        self.user_id: str | None = None
        self.replica: WorkspaceState | None = None
        self.inbox: deque = deque()
        self.connected = False
        self.client_seq = 0
        self.submitted = 0
        self.turns = 0
        self.speaking = False
        self.pending: dict = {}
        self.last_op: Operation | None = None
        self.verdicts: dict = {}
        self.duplicate_mismatches: list = []

    def handle_message(self, msg: dict, rejections: dict) -> None:
        kind = msg.get("type")
        if kind == "welcome":
            self.user_id = msg["your_user_id"]
            if msg.get("snapshot") is not None:
                self.replica = restore(canonical_bytes(msg["snapshot"]))
            # On resume the replica is kept; missing ops follow as broadcasts.
        elif kind == "op_broadcast":
            op = op_from_wire(msg["op"])
            if self.replica is not None and op.server_seq == self.replica.applied_seq + 1:
                self.replica, events = apply(self.replica, op)
                for event in events:
                    if event.kind in ("note_deleted", "link_deleted", "label_detached", "panel_deleted"):
                        self.generator.dead_ids.append(event.target)
        elif kind == "op_accepted":
            key = (msg["client_id"], msg["client_seq"])
            self.pending.pop(key, None)
            previous = self.verdicts.get(key)
            verdict = ("accepted", msg["server_seq"])
            if previous is not None and previous != verdict:
                self.duplicate_mismatches.append((key, previous, verdict))
            self.verdicts[key] = verdict
        elif kind == "op_rejected":
            key = (msg["client_id"], msg["client_seq"])
            self.pending.pop(key, None)
            reason = msg["reason"]
            previous = self.verdicts.get(key)
            verdict = ("rejected", reason)
            if previous is not None and previous != verdict:
                self.duplicate_mismatches.append((key, previous, verdict))
            if previous is None:
                rejections[reason] = rejections.get(reason, 0) + 1
            self.verdicts[key] = verdict

    def hello(self, room: str, resume: bool) -> Hello:
        resume_from = self.replica.applied_seq if (resume and self.replica is not None) else None
        return Hello(room, self.name, resume_from)

    def next_op(self, clock_ms: int) -> Operation | None:
        if self.replica is None or self.user_id is None:
            return None
        payload = self.generator.next_payload(self.replica, self.user_id)
        self.client_seq += 1
        op = Operation(self.user_id, self.client_seq, self.user_id, clock_ms, payload)
        self.pending[op.op_id] = op
        self.last_op = op
        return op

    def on_disconnect(self) -> None:
        self.connected = False
        self.inbox.clear()
        self.pending.clear()
        # A reconnect joins as a fresh identity with a fresh sequence.
        self.client_seq = 0
        self.user_id = None
        self.last_op = None
        self.verdicts = {}


@dataclass
class Report:
    passed: bool
    mode: str
    assertions: dict
    ops_submitted: int
    ops_accepted: int
    rejections: dict
    resubmissions: int
    elapsed_s: float
    latency_ms: dict
    transcript_sha256: str
    divergence: str = ""

    def to_doc(self) -> dict:
        return {
            "passed": self.passed,
            "mode": self.mode,
            "assertions": self.assertions,
            "ops_submitted": self.ops_submitted,
            "ops_accepted": self.ops_accepted,
            "rejections": self.rejections,
            "resubmissions": self.resubmissions,
            "elapsed_s": round(self.elapsed_s, 3),
            "latency_ms": self.latency_ms,
            "transcript_sha256": self.transcript_sha256,
            "divergence": self.divergence,
        }

    def summary(self) -> str:
        lines = [f"simharness: {'PASS' if self.passed else 'FAIL'} ({self.mode} mode, {self.elapsed_s:.2f}s)"]
        for name, result in self.assertions.items():
            mark = "ok" if result["passed"] else "FAIL"
            detail = f" — {result['detail']}" if result.get("detail") else ""
            lines.append(f"  [{mark}] {name}{detail}")
        lines.append(
            f"  ops: {self.ops_submitted} submitted, {self.ops_accepted} accepted, "
            f"{self.resubmissions} resubmitted"
        )
        if self.rejections:
            parts = ", ".join(f"{k}={v}" for k, v in sorted(self.rejections.items()))
            lines.append(f"  rejections: {parts}")
        lines.append(
            "  latency: mean {mean:.3f} ms, p95 {p95:.3f} ms, max {max:.3f} ms".format(**self.latency_ms)
        )
        return "\n".join(lines)


def snapshot_divergence(expected: bytes, got: bytes, label: str) -> str:
    if expected == got:
        return ""
    limit = min(len(expected), len(got))
    offset = next((i for i in range(limit) if expected[i] != got[i]), limit)
    window = slice(max(0, offset - 40), offset + 40)
    return (
        f"{label}: first differing byte at {offset}\n"
        f"  server: ...{expected[window]!r}...\n"
        f"  agent:  ...{got[window]!r}..."
    )


def _latency_summary(samples: list) -> dict:
    if not samples:
        return {"mean": 0.0, "p95": 0.0, "max": 0.0}
    ordered = sorted(samples)
    return {
        "mean": sum(samples) / len(samples),
        "p95": ordered[min(len(ordered) - 1, int(len(ordered) * 0.95))],
        "max": ordered[-1],
    }


def run_inprocess(scenario: Scenario) -> Report:
    started = time.monotonic()
    clock = VirtualClock()
    room_holder: dict = {}

    def make_room(room_id: str) -> Room:
        room = Room(
            room_id,
            clipboard=list(DEFAULT_CLIPBOARD),
            clock=clock,
            gamification_enabled=scenario.gamification,
            checked=scenario.checked,
        )
        room_holder[room_id] = room
        return room

    host = RoomHost(make_room, clock=clock)
    rng = random.Random(scenario.seed)
    rejections: dict = {}
    latencies: list = []
    transcript = hashlib.sha256()
    resubmissions = 0

    agents = [
        Agent(i, OpGenerator(random.Random(scenario.seed * 1000 + i), scenario.op_mix, scenario.stale_fraction), scenario.ops_per_agent)
        for i in range(scenario.agents)
    ]
    disconnect_at = {}
    reconnect_at = {}
    for d in scenario.disturbances:
        disconnect_at.setdefault(d.agent, []).append(d.disconnect_at)
        reconnect_at.setdefault(d.agent, []).append(d.reconnect_at)

    def deliver(outbox) -> None:
        by_conn = {a.conn_id: a for a in agents}
        for conn_id, message in outbox:
            agent = by_conn.get(conn_id)
            if agent is not None and agent.connected:
                agent.inbox.append(message)

    def connect(agent: Agent, resume: bool) -> None:
        agent.connected = True
        hello = agent.hello(scenario.room, resume)
        transcript.update(f"hello:{agent.index}:{hello.resume_from_seq}".encode())
        deliver(host.handle(agent.conn_id, hello))

    for agent in agents:
        connect(agent, resume=False)
        clock.advance(5)

    def drain(agent: Agent) -> None:
        while agent.inbox:
            agent.handle_message(agent.inbox.popleft(), rejections)

    max_turns = max(1000, scenario.agents * scenario.ops_per_agent * 50)
    total_turns = 0
    while True:
        work_left = any(a.submitted < a.quota for a in agents)
        mess_left = any(a.inbox for a in agents)
        disconnected = any(not a.connected for a in agents)
        if not work_left and not mess_left and not disconnected:
            break
        total_turns += 1
        if total_turns > max_turns:
            raise RuntimeError("simulation failed to quiesce; check disturbance schedule")

        agent = agents[total_turns % len(agents)]
        agent.turns += 1
        clock.advance(3)

        if agent.connected and agent.turns in disconnect_at.get(agent.index, ()):
            host.disconnect(agent.conn_id)
            agent.on_disconnect()
            continue
        if not agent.connected:
            if agent.turns in reconnect_at.get(agent.index, ()) or (
                agent.turns > max(reconnect_at.get(agent.index, [0]) or [0]) and agent.submitted < agent.quota
            ):
                connect(agent, resume=True)
            else:
                continue

        drain(agent)

        if agent.submitted >= agent.quota:
            continue
        if agent.replica is None or agent.user_id is None:
            continue

        if agent.last_op is not None and rng.random() < scenario.resubmit_fraction:
            op = agent.last_op  # idempotent resubmission of the same envelope
            resubmissions += 1
        else:
            op = agent.next_op(clock.now)
            if op is None:
                continue
            agent.submitted += 1
        t0 = time.perf_counter()
        outbox = host.handle(agent.conn_id, SubmitOp(op))
        latencies.append((time.perf_counter() - t0) * 1000.0)
        transcript.update(canonical_bytes(op_to_wire(op)))
        for _, message in outbox:
            if message.get("type") in ("op_accepted", "op_rejected"):
                transcript.update(canonical_bytes(message))
        deliver(outbox)

        if scenario.speaking_fraction and rng.random() < scenario.speaking_fraction:
            agent.speaking = not agent.speaking
            deliver(host.handle(agent.conn_id, Speaking(agent.speaking)))
        if rng.random() < 0.05:
            viewport = Rect.of(-500, -500, 500, 500)
            deliver(host.handle(agent.conn_id, PresenceUpdate(Vec2.of(rng.uniform(-500, 500), 0), viewport)))

    for agent in agents:
        drain(agent)

    room = room_holder[scenario.room]
    server_bytes = snapshot(room.state)
    assertions: dict = {}
    divergence = ""

    if "convergence" in scenario.assertions:
        failed = []
        for agent in agents:
            agent_bytes = snapshot(agent.replica) if agent.replica is not None else b""
            if agent_bytes != server_bytes:
                failed.append(agent.index)
                if not divergence:
                    divergence = snapshot_divergence(server_bytes, agent_bytes, f"agent {agent.index}")
        mismatch = [a.index for a in agents if a.duplicate_mismatches]
        detail = ""
        if failed:
            detail = f"diverged agents: {failed}"
        if mismatch:
            detail += f" verdict mismatches: {mismatch}"
        assertions["convergence"] = {"passed": not failed and not mismatch, "detail": detail}

    if "integrity" in scenario.assertions:
        problems = integrity_errors(room.state) + panel_consistency_errors(room.state)
        assertions["integrity"] = {"passed": not problems, "detail": "; ".join(problems[:3])}

    if "score_replay" in scenario.assertions and scenario.gamification:
        now = clock.now
        replayed = replay(room.metrics.board.session_start, room.session_initial_state, room.metrics.log)
        same = replayed.to_wire(now) == room.metrics.board.to_wire(now)
        assertions["score_replay"] = {"passed": same, "detail": "" if same else "replayed scoreboard differs"}

    if "clone_oracle" in scenario.assertions:
        sample_rng = random.Random(scenario.seed + 99)
        notes = list(room.state.notes)
        sample = sample_rng.sample(notes, k=min(50, len(notes)))
        bad = []
        for source in sample:
            got = clone_targets(room.state, source).targets
            wanted = normalize_text(room.state.notes[source].text)
            naive = {
                n for n in notes
                if n != source and wanted and normalize_text(room.state.notes[n].text) == wanted
            }
            if got != frozenset(naive):
                bad.append(source)
        assertions["clone_oracle"] = {"passed": not bad, "detail": f"mismatched: {bad[:3]}" if bad else ""}

    passed = all(result["passed"] for result in assertions.values())
    return Report(
        passed=passed,
        mode="inprocess",
        assertions=assertions,
        ops_submitted=sum(a.submitted for a in agents),
        ops_accepted=room.state.applied_seq,
        rejections=rejections,
        resubmissions=resubmissions,
        elapsed_s=time.monotonic() - started,
        latency_ms=_latency_summary(latencies),
        transcript_sha256=transcript.hexdigest(),
        divergence=divergence,
    )


def run(scenario: Scenario, mode: str = "inprocess", connect_addr: str | None = None) -> Report:
    if mode == "inprocess":
        return run_inprocess(scenario)
    if mode == "connect":
        from .loopback import run_loopback

        return run_loopback(scenario, connect_addr or "127.0.0.1:8080")
    raise ValueError(f"unknown mode {mode!r}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="simharness", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run a scenario and report")
    run_p.add_argument("--scenario", help="scenario JSON file (defaults used when omitted)")
    run_p.add_argument("--inprocess", action="store_true", help="deterministic in-process mode (default)")
    run_p.add_argument("--connect", metavar="ADDR", help="loopback mode against a running server")
    run_p.add_argument("--seed", type=int, help="override scenario seed")
    run_p.add_argument("--agents", type=int, help="override agent count")
    run_p.add_argument("--ops", type=int, help="override ops per agent")
    run_p.add_argument("--report", metavar="PATH", help="write the JSON report here")
    args = parser.parse_args(argv)

    scenario = Scenario.load(args.scenario) if args.scenario else Scenario()
    if args.seed is not None:
        scenario.seed = args.seed
    if args.agents is not None:
        scenario.agents = args.agents
    if args.ops is not None:
        scenario.ops_per_agent = args.ops

    mode = "connect" if args.connect else "inprocess"
    report = run(scenario, mode=mode, connect_addr=args.connect)
    print(report.summary())
    if report.divergence:
        print(report.divergence)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(report.to_doc(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
