"""Blocking NDJSON protocol client with a local state replica."""
from __future__ import annotations

import json
import socket
import uuid
from typing import Any, Optional

from ..measure.jsonio import canonical_json
from .model import Replica


class ProtocolError(RuntimeError):
    pass


class CollabClient:
    """One connection to one project.

    send_op blocks until the server answers with ack or error; any events
    read along the way (our own included) are folded into the replica, so
    after an accepted op the local state already reflects it.
    """

    def __init__(self, host: str, port: int, project_id: str, token: str,
                 client_id: Optional[str] = None, timeout: float = 10.0):
        self.project_id = project_id
        self.client_id = client_id or str(uuid.uuid4())
        self._seq = 0
        self._sock = socket.create_connection((host, port), timeout=timeout)
        self._rfile = self._sock.makefile("rb")
        self._send({"type": "hello", "projectId": project_id, "token": token})
        msg = self._recv()
        if msg.get("type") == "error":
            err = msg.get("error", {})
            raise ProtocolError(f"{err.get('code')}: {err.get('detail')}")
        if msg.get("type") != "welcome":
            raise ProtocolError(f"expected welcome, got {msg.get('type')!r}")
        self.user = msg.get("user", "")
        self.role = msg.get("role", "")
        self.replica = Replica(snapshot=msg["snapshot"])

    # wire helpers ---------------------------------------------------------

    def _send(self, obj: dict) -> None:
        self._sock.sendall((canonical_json(obj) + "\n").encode("utf-8"))

    def _recv(self) -> dict:
        line = self._rfile.readline()
        if not line:
            raise ProtocolError("connection closed by server")
        obj = json.loads(line.decode("utf-8"))
        if not isinstance(obj, dict):
            raise ProtocolError("malformed message from server")
        return obj

    def _ingest(self, msg: dict) -> None:
        self.replica.ingest({"seq": msg["seq"], "op": msg["op"]})

    # public API -----------------------------------------------------------

    def next_client_seq(self) -> int:
        self._seq += 1
        return self._seq

    def send_op(self, action: str, layer_id: str,
                series_id: Optional[str] = None,
                payload: Optional[dict] = None,
                base_version: Optional[int] = None,
                client_seq: Optional[int] = None) -> dict[str, Any]:
        """Returns {"status": "accepted", "seq": n} or
        {"status": "rejected", "error": {code, detail, current?}}."""
        cseq = client_seq if client_seq is not None else self.next_client_seq()
        op: dict[str, Any] = {
            "opId": [self.client_id, cseq],
            "action": action,
            "target": {"layer": layer_id, "series": series_id},
            "payload": payload,
        }
        if base_version is not None:
            op["baseVersion"] = base_version
        self._send({"type": "op", "projectId": self.project_id, "op": op})
        while True:
            msg = self._recv()
            kind = msg.get("type")
            if kind == "event":
                self._ingest(msg)
            elif kind == "ack":
                return {"status": "accepted", "seq": msg["seq"]}
            elif kind == "error":
                return {"status": "rejected", "error": msg.get("error", {})}
            else:
                raise ProtocolError(f"unexpected message {kind!r}")

    def sync(self, until_seq: int, timeout: float = 10.0) -> None:
        """Drain events until the replica reaches the given server seq."""
        old = self._sock.gettimeout()
        self._sock.settimeout(timeout)
        try:
            while self.replica.seq < until_seq:
                msg = self._recv()
                if msg.get("type") == "event":
                    self._ingest(msg)
        except socket.timeout:
            raise TimeoutError(
                f"replica at {self.replica.seq}, wanted {until_seq}") from None
        finally:
            self._sock.settimeout(old)

    def state_hash(self) -> str:
        return self.replica.state_hash()

    def close(self) -> None:
        try:
            self._send({"type": "bye", "projectId": self.project_id})
        except OSError:
            pass
        try:
            self._rfile.close()
        finally:
            self._sock.close()

    def __enter__(self) -> "CollabClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
