"""collabmap: room-based real-time collaborative mind mapping.

Shared-workspace document model, server-authoritative sync protocol,
situational-awareness derivations (clone indicators, minimap), gamification
metrics, a websocket server, and a headless multi-client simulation harness.
"""

from .engine import RejectReason, StateEvent, apply, panel_snap, validate
from .geometry import Rect, Vec2, label_layout, panel_fit
from .model import WorkspaceState
from .ops import Operation
from .room import Room
from .snapshot import restore, snapshot

__all__ = [
    "apply", "validate", "panel_snap", "panel_fit", "label_layout",
    "Rect", "Vec2", "WorkspaceState", "Operation", "Room",
    "RejectReason", "StateEvent", "snapshot", "restore",
]

__version__ = "0.1.0"
