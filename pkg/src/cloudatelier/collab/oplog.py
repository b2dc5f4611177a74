"""Append-only op log + snapshot persistence.

Recovery = load the latest snapshot, then replay every logged event with a
higher sequence. The log holds one JSON event per line, written before the
ack leaves the server.
"""
from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Optional

from ..measure.jsonio import canonical_json
from .model import Session

OPLOG_NAME = "oplog.ndjson"
SNAPSHOT_NAME = "snapshot.json"


class OpLog:
    def __init__(self, directory: Path | str):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.path = self.directory / OPLOG_NAME
        self._f = open(self.path, "a", encoding="utf-8")

    def append(self, event: dict) -> None:
        self._f.write(canonical_json(event) + "\n")
        self._f.flush()
        os.fsync(self._f.fileno())

    def events(self):
        self._f.flush()
        if not self.path.exists():
            return
        with open(self.path, "r", encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if line:
                    yield json.loads(line)

    def close(self) -> None:
        self._f.close()


def write_snapshot(directory: Path | str, session: Session) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / SNAPSHOT_NAME
    tmp = path.with_suffix(".json.tmp")
    tmp.write_text(canonical_json(session.snapshot()) + "\n",
                   encoding="utf-8")
    tmp.replace(path)
    return path


def load_snapshot(directory: Path | str) -> Optional[dict]:
    path = Path(directory) / SNAPSHOT_NAME
    if not path.exists():
        return None
    return json.loads(path.read_text(encoding="utf-8"))


def recover(directory: Path | str, project_id: str) -> Session:
    """Snapshot + tail replay; a fresh session when neither file exists."""
    snap = load_snapshot(directory)
    session = Session.from_snapshot(snap) if snap else Session(project_id)
    log_path = Path(directory) / OPLOG_NAME
    if log_path.exists():
        with open(log_path, "r", encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if not line:
                    continue
                event = json.loads(line)
                if event["seq"] > session.seq:
                    session.apply_event(event)
                    # repopulate idempotence bookkeeping from the log
                    cid, cseq = event["op"]["opId"]
                    session.note_applied(cid, cseq, event["seq"])
    return session
