"""Collaborative annotation: session semantics, persistence, wire protocol."""
from .client import CollabClient, ProtocolError
from .config import ProjectConfig, User, config_from_obj, load_project_config
from .model import (
    Outcome,
    OpAction,
    Rejection,
    Replica,
    Role,
    Session,
    SessionOp,
)
from .oplog import OpLog, load_snapshot, recover, write_snapshot
from .server import CollabService, ProjectRuntime

__all__ = [
    "CollabClient",
    "CollabService",
    "OpAction",
    "OpLog",
    "Outcome",
    "ProjectConfig",
    "ProjectRuntime",
    "ProtocolError",
    "Rejection",
    "Replica",
    "Role",
    "Session",
    "SessionOp",
    "User",
    "config_from_obj",
    "load_project_config",
    "load_snapshot",
    "recover",
    "write_snapshot",
]
