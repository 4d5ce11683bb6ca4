"""Websocket service hosting rooms: connections, persistence, autosave.

One asyncio event loop runs everything; room sequencing happens inside
synchronous host calls, so each room has exactly one logical writer.
Snapshots are captured as immutable values and written off the sequencing
path. Rooms auto-create on first join and restore their saved snapshot if
one exists.
"""
from __future__ import annotations

import argparse
import asyncio
import json
import logging
import re
import time
from dataclasses import dataclass, field
from pathlib import Path

import uvicorn
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from .model import ClipboardItem, ClipboardKind
from .ops import WireError
from .persistence import load_snapshot, save_snapshot
from .protocol import Hello, client_message_from_wire
from .room import Room
from .service import RoomHost
from .snapshot import canonical_json

logger = logging.getLogger(__name__)

ROOM_ID_RE = re.compile(r"^[A-Za-z0-9._-]{1,64}$")
REAP_INTERVAL_S = 5.0


@dataclass
class RoomConfig:
    room_id: str
    clipboard_source: str | None = None
    gamification_enabled: bool = True
    autosave_interval_seconds: int = 30
    persistence_directory: str | None = None

    def __post_init__(self):
        if not ROOM_ID_RE.match(self.room_id):
            raise ValueError(f"room id {self.room_id!r} is empty or not filesystem-safe")
        if self.autosave_interval_seconds < 1:
            raise ValueError("autosave_interval_seconds must be >= 1")


@dataclass
class ServerConfig:
    data_dir: Path = Path("./data")
    defaults: dict = field(default_factory=dict)
    rooms: dict = field(default_factory=dict)  # room_id -> overrides
    app_dir: Path | None = None

    @staticmethod
    def load(path: str | None, data_dir: str) -> "ServerConfig":
        config = ServerConfig(data_dir=Path(data_dir))
        if path:
            with open(path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
            config.defaults = dict(doc.get("defaults", {}))
            config.rooms = {rid: dict(overrides) for rid, overrides in doc.get("rooms", {}).items()}
            if doc.get("app_dir"):
                config.app_dir = Path(doc["app_dir"])
        return config

    def room_config(self, room_id: str) -> RoomConfig:
        options = dict(self.defaults)
        options.update(self.rooms.get(room_id, {}))
        return RoomConfig(
            room_id=room_id,
            clipboard_source=options.get("clipboard_source"),
            gamification_enabled=bool(options.get("gamification_enabled", True)),
            autosave_interval_seconds=int(options.get("autosave_interval_seconds", 30)),
            persistence_directory=options.get("persistence_directory"),
        )


def load_clipboard(path: str | Path) -> list:
    """Parse a clipboard file: one ``note:`` or ``label:`` snippet per line."""
    items = []
    with open(path, "r", encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if line.startswith("note:"):
                items.append(ClipboardItem(f"clip:{i}", line[len("note:"):].strip(), ClipboardKind.NOTE_SOURCE))
            elif line.startswith("label:"):
                items.append(ClipboardItem(f"clip:{i}", line[len("label:"):].strip(), ClipboardKind.LABEL_SOURCE))
            else:
                logger.warning("%s:%d: ignoring line without note:/label: prefix", path, i + 1)
    return items


class Service:
    """Glue between the websocket layer, the room host, and persistence."""

    def __init__(self, config: ServerConfig):
        self.config = config
        self.host = RoomHost(self._make_room)
        self.host.on_room_idle = self._on_room_idle
        self.sockets: dict = {}  # conn_id -> WebSocket
        self.conn_counter = 0
        self.started_at = time.time()
        self.dirty_seq: dict = {}  # room_id -> applied_seq at last save
        self.last_autosave: dict = {}  # room_id -> monotonic seconds
        self.joined: set = set()  # conn_ids that completed a hello

    # -- room lifecycle ------------------------------------------------------

    def _room_dir(self, room_config: RoomConfig) -> Path:
        if room_config.persistence_directory:
            return Path(room_config.persistence_directory)
        return self.config.data_dir

    def _make_room(self, room_id: str) -> Room | None:
        if not ROOM_ID_RE.match(room_id):
            return None
        room_config = self.config.room_config(room_id)
        clipboard = load_clipboard(room_config.clipboard_source) if room_config.clipboard_source else []
        state = load_snapshot(self._room_dir(room_config), room_id)
        if state is not None:
            logger.info("room %s: restored snapshot at seq %d", room_id, state.applied_seq)
            if not state.clipboard and clipboard:
                state.clipboard = list(clipboard)
        room = Room(
            room_id,
            clipboard=clipboard,
            initial_state=state,
            gamification_enabled=room_config.gamification_enabled,
        )
        self.dirty_seq[room_id] = room.state.applied_seq
        return room

    def _on_room_idle(self, room_id: str, hosted) -> None:
        self.save_room(room_id, hosted.room)
        self.export_metrics(room_id, hosted.room)

    def save_room(self, room_id: str, room: Room) -> None:
        room_config = self.config.room_config(room_id)
        try:
            save_snapshot(self._room_dir(room_config), room_id, room.state)
            self.dirty_seq[room_id] = room.state.applied_seq
            logger.debug("room %s: saved snapshot at seq %d", room_id, room.state.applied_seq)
        except OSError as exc:
            logger.error("room %s: snapshot save failed, will retry: %s", room_id, exc)

    def export_metrics(self, room_id: str, room: Room) -> None:
        if not room.gamification_enabled:
            return
        room_config = self.config.room_config(room_id)
        target = self._room_dir(room_config) / f"{room_id}.metrics.json"
        doc = {
            "room": room_id,
            "session_start": room.metrics.board.session_start,
            "scoreboard": room.metrics.board.to_wire(room.clock()),
            "events": [
                entry if entry["kind"] != "op" else {
                    "kind": "op",
                    "at": entry["at"],
                    "server_seq": entry["op"].server_seq,
                    "actor": entry["op"].actor,
                    "payload_kind": entry["op"].payload.kind,
                }
                for entry in room.metrics.log
            ],
        }
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            with open(target, "w", encoding="utf-8") as fh:
                json.dump(doc, fh, sort_keys=True)
                fh.write("\n")
        except OSError as exc:
            logger.error("room %s: metrics export failed: %s", room_id, exc)

    # -- background tasks ------------------------------------------------------

    async def autosave_loop(self) -> None:
        while True:
            await asyncio.sleep(1.0)
            now = time.monotonic()
            for room_id, hosted in list(self.host.rooms.items()):
                room_config = self.config.room_config(room_id)
                if now - self.last_autosave.get(room_id, 0.0) < room_config.autosave_interval_seconds:
                    continue
                self.last_autosave[room_id] = now
                if self.dirty_seq.get(room_id) == hosted.room.state.applied_seq:
                    continue
                # save_room captures room.state, an immutable value.
                await asyncio.get_running_loop().run_in_executor(
                    None, self.save_room, room_id, hosted.room
                )

    async def reap_loop(self) -> None:
        while True:
            await asyncio.sleep(REAP_INTERVAL_S)
            outbox = self.host.reap(int(time.time() * 1000))
            await self.send_outbox(outbox)
            # Close sockets whose members were reaped (joined but no longer in a room).
            for conn_id, ws in list(self.sockets.items()):
                if conn_id in self.joined and conn_id not in self.host.conn_room:
                    self.sockets.pop(conn_id, None)
                    self.joined.discard(conn_id)
                    try:
                        await ws.close(code=1001, reason="heartbeat timeout")
                    except Exception:
                        pass

    # -- websocket plumbing ------------------------------------------------------

    async def send_outbox(self, outbox) -> None:
        for conn_id, message in outbox:
            ws = self.sockets.get(conn_id)
            if ws is None:
                continue
            try:
                await ws.send_text(canonical_json(message))
            except Exception:
                logger.debug("send to %s failed; dropping connection", conn_id)
                self.sockets.pop(conn_id, None)

    async def handle_socket(self, ws: WebSocket, room_id: str) -> None:
        if not ROOM_ID_RE.match(room_id):
            await ws.close(code=4000, reason="bad room id")
            return
        await ws.accept()
        self.conn_counter += 1
        conn_id = f"ws-{self.conn_counter}"
        self.sockets[conn_id] = ws
        joined = False
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = client_message_from_wire(json.loads(raw))
                except (json.JSONDecodeError, WireError) as exc:
                    if not joined:
                        # Malformed hello: close with a diagnostic.
                        await ws.close(code=4002, reason=f"malformed message: {exc}")
                        return
                    await self.send_outbox([(conn_id, {"type": "error", "message": str(exc)})])
                    continue
                if isinstance(msg, Hello):
                    if msg.room != room_id:
                        await ws.close(code=4003, reason="room mismatch with endpoint path")
                        return
                    joined = True
                    self.joined.add(conn_id)
                outbox = self.host.handle(conn_id, msg)
                await self.send_outbox(outbox)
        except WebSocketDisconnect:
            pass
        finally:
            self.sockets.pop(conn_id, None)
            self.joined.discard(conn_id)
            outbox = self.host.disconnect(conn_id)
            await self.send_outbox(outbox)


def create_app(config: ServerConfig) -> FastAPI:
    from contextlib import asynccontextmanager

    from .service import HostedRoom

    service = Service(config)

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        # Eagerly restore rooms named in the config so their state is ready.
        for room_id in config.rooms:
            if room_id not in service.host.rooms:
                room = service._make_room(room_id)
                if room is not None:
                    service.host.rooms[room_id] = HostedRoom(room=room)
        tasks = [
            asyncio.create_task(service.autosave_loop()),
            asyncio.create_task(service.reap_loop()),
        ]
        try:
            yield
        finally:
            for task in tasks:
                task.cancel()
            for room_id, hosted in service.host.rooms.items():
                service.save_room(room_id, hosted.room)
                service.export_metrics(room_id, hosted.room)

    app = FastAPI(title="collabmap", lifespan=lifespan)
    app.state.service = service

    @app.get("/healthz")
    async def healthz():
        return {
            "status": "ok",
            "rooms": len(service.host.rooms),
            "connections": len(service.sockets),
            "uptime_seconds": round(time.time() - service.started_at, 3),
        }

    @app.websocket("/ws/{room_id}")
    async def ws_endpoint(ws: WebSocket, room_id: str):
        await service.handle_socket(ws, room_id)

    if config.app_dir and Path(config.app_dir).is_dir():
        app.mount("/app", StaticFiles(directory=str(config.app_dir), html=True), name="app")

    return app


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="collabmap-server", description="collabmap websocket server")
    parser.add_argument("--listen", default="0.0.0.0:8080", metavar="ADDR:PORT")
    parser.add_argument("--data-dir", default="./data", help="snapshot and metrics directory")
    parser.add_argument("--config", help="room configuration JSON file")
    parser.add_argument("--log-level", default="info", choices=["debug", "info", "warning", "error"])
    parser.add_argument("--app-dir", help="serve a built web client from this directory under /app")
    args = parser.parse_args(argv)

    logging.basicConfig(level=args.log_level.upper(), format="%(asctime)s %(name)s %(levelname)s %(message)s")
    host, _, port = args.listen.rpartition(":")
    config = ServerConfig.load(args.config, args.data_dir)
    if args.app_dir:
        config.app_dir = Path(args.app_dir)
    app = create_app(config)
    uvicorn.run(app, host=host or "0.0.0.0", port=int(port), log_level=args.log_level)
    return 0


if __name__ == "__main__":
    import sys

    sys.exit(main())
