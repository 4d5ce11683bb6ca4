"""Loopback harness mode: scenario agents over real websocket connections.

Timing here is nondeterministic, so only convergence-style assertions run:
after quiescence every agent replica must match the snapshot a freshly
joined observer receives from the server. Scenario files are shared with
the in-process mode.
"""
from __future__ import annotations

import asyncio
import json
import logging
import random
import time

import websockets

from .ops import op_from_wire, op_to_wire
from .protocol import Hello, Speaking, SubmitOp, client_message_to_wire
from .simharness import Agent, OpGenerator, Report, Scenario, _latency_summary, snapshot_divergence
from .snapshot import canonical_bytes, snapshot

logger = logging.getLogger(__name__)

QUIESCENCE_SILENCE_S = 0.8


class LoopbackAgent:
    def __init__(self, scenario: Scenario, index: int, addr: str):
        self.scenario = scenario
        self.inner = Agent(
            index,
            OpGenerator(random.Random(scenario.seed * 1000 + index), scenario.op_mix, scenario.stale_fraction),
            scenario.ops_per_agent,
        )
        self.url = f"ws://{addr}/ws/{scenario.room}"
        self.rejections: dict = {}
        self.latencies: list = []
        self.submit_times: dict = {}

    async def _send(self, ws, msg) -> None:
        await ws.send(json.dumps(client_message_to_wire(msg)))

    def _fold(self, raw: str) -> None:
        msg = json.loads(raw)
        kind = msg.get("type")
        if kind in ("op_accepted", "op_rejected"):
            key = (msg["client_id"], msg["client_seq"])
            t0 = self.submit_times.pop(key, None)
            if t0 is not None:
                self.latencies.append((time.perf_counter() - t0) * 1000.0)
        self.inner.handle_message(msg, self.rejections)

    async def _drain_quiet(self, ws, silence_s: float) -> None:
        while True:
            try:
                raw = await asyncio.wait_for(ws.recv(), timeout=silence_s)
            except asyncio.TimeoutError:
                return
            self._fold(raw)

    async def run(self) -> None:
        agent = self.inner
        rng = random.Random(self.scenario.seed * 77 + agent.index)
        disturbances = sorted(
            (d.disconnect_at, d.reconnect_at)
            for d in self.scenario.disturbances
            if d.agent == agent.index
        )
        ws = await websockets.connect(self.url)
        agent.connected = True
        await self._send(ws, Hello(self.scenario.room, agent.name, None))
        while agent.replica is None:
            self._fold(await ws.recv())
        try:
            while agent.submitted < agent.quota or agent.pending:
                if disturbances and agent.submitted >= disturbances[0][0]:
                    _, resume_after = disturbances.pop(0)
                    await ws.close()
                    agent.on_disconnect()
                    await asyncio.sleep(0.05 * max(1, resume_after - agent.submitted))
                    ws = await websockets.connect(self.url)
                    agent.connected = True
                    await self._send(ws, Hello(self.scenario.room, agent.name, agent.replica.applied_seq))
                    while agent.user_id is None:
                        self._fold(await ws.recv())
                await self._drain_quiet(ws, 0.001)
                if agent.submitted < agent.quota:
                    op = agent.next_op(int(time.time() * 1000))
                    if op is None:
                        await asyncio.sleep(0.005)
                        continue
                    agent.submitted += 1
                    self.submit_times[op.op_id] = time.perf_counter()
                    await self._send(ws, SubmitOp(op))
                    if rng.random() < self.scenario.speaking_fraction:
                        agent.speaking = not agent.speaking
                        await self._send(ws, Speaking(agent.speaking))
                else:
                    await self._drain_quiet(ws, 0.05)
            await self._drain_quiet(ws, QUIESCENCE_SILENCE_S)
        finally:
            await ws.close()


async def _observer_snapshot(addr: str, room: str) -> bytes:
    """Fresh join of a quiescent room: its welcome carries the server state."""
    url = f"ws://{addr}/ws/{room}"
    async with websockets.connect(url) as ws:
        await ws.send(json.dumps(client_message_to_wire(Hello(room, "observer", None))))
        while True:
            msg = json.loads(await ws.recv())
            if msg.get("type") == "welcome":
                return canonical_bytes(msg["snapshot"])


async def _run_async(scenario: Scenario, addr: str) -> Report:
    started = time.monotonic()
    agents = [LoopbackAgent(scenario, i, addr) for i in range(scenario.agents)]
    await asyncio.gather(*(a.run() for a in agents))
    server_bytes = await _observer_snapshot(addr, scenario.room)

    divergence = ""
    failed = []
    for a in agents:
        replica_bytes = snapshot(a.inner.replica) if a.inner.replica is not None else b""
        if replica_bytes != server_bytes:
            failed.append(a.inner.index)
            if not divergence:
                divergence = snapshot_divergence(server_bytes, replica_bytes, f"agent {a.inner.index}")

    rejections: dict = {}
    latencies: list = []
    for a in agents:
        for reason, count in a.rejections.items():
            rejections[reason] = rejections.get(reason, 0) + count
        latencies.extend(a.latencies)

    assertions = {
        "convergence": {"passed": not failed, "detail": f"diverged agents: {failed}" if failed else ""}
    }
    return Report(
        passed=not failed,
        mode="connect",
        assertions=assertions,
        ops_submitted=sum(a.inner.submitted for a in agents),
        ops_accepted=sum(1 for a in agents for v in a.inner.verdicts.values() if v[0] == "accepted"),
        rejections=rejections,
        resubmissions=0,
        elapsed_s=time.monotonic() - started,
        latency_ms=_latency_summary(latencies),
        transcript_sha256="",
        divergence=divergence,
    )


def run_loopback(scenario: Scenario, addr: str) -> Report:
    return asyncio.run(_run_async(scenario, addr))
