"""Atomic room snapshot persistence.

Snapshots are written to a temp file and renamed into place, so a crash at
any instant leaves either the previous or the new complete document on
disk. A corrupt snapshot found at startup is preserved under a ``.bad``
suffix and the room starts empty.
"""
from __future__ import annotations

import logging
import os
from pathlib import Path

from .model import WorkspaceState
from .snapshot import SnapshotError, restore, snapshot

logger = logging.getLogger(__name__)


def snapshot_path(data_dir: Path, room_id: str) -> Path:
    return Path(data_dir) / f"{room_id}.snapshot"


def save_snapshot(data_dir: Path, room_id: str, state: WorkspaceState) -> Path:
    data_dir = Path(data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)
    target = snapshot_path(data_dir, room_id)
    tmp = target.with_name(target.name + ".tmp")
    payload = snapshot(state)
    with open(tmp, "wb") as fh:
        fh.write(payload)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, target)
    return target


def load_snapshot(data_dir: Path, room_id: str) -> WorkspaceState | None:
    """Restore a room's saved state; corrupt files are set aside as .bad."""
    target = snapshot_path(Path(data_dir), room_id)
    if not target.exists():
        return None
    raw = target.read_bytes()
    try:
        return restore(raw)
    except SnapshotError as exc:
        bad = target.with_name(target.name + ".bad")
        os.replace(target, bad)
        logger.error("room %s: corrupt snapshot preserved at %s (%s)", room_id, bad, exc)
        return None
