"""Reference server: NDJSON collab protocol over TCP + HTTP tile serving.

Protocol messages are one JSON object per line. A client opens with
{"type": "hello", "projectId": ..., "token": ...}; the server answers
welcome (with a state snapshot) or error, then accepts op / bye. Accepted
ops are logged, acked, and broadcast as events to every connection on the
project. All writes to a socket flow through one writer thread per
connection, so events and acks never interleave mid-line.

The HTTP side serves read-only build artifacts:

    GET /projects/<id>/manifest.json
    GET /projects/<id>/nodes/<code>.bin
    GET /projects/<id>/byproduct.json | byproduct.bin
"""
from __future__ import annotations

import json
import logging
import queue
import re
import socket
import socketserver
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional

from ..errors import ValidationFailed
from ..measure.jsonio import canonical_json
from .config import ProjectConfig, User
from .model import SessionOp
from .oplog import OpLog, recover, write_snapshot

log = logging.getLogger("cloudatelier.collab")

_NODE_RE = re.compile(r"^r[0-7]*$")
_HTTP_ROUTES = (
    re.compile(r"^/projects/([A-Za-z0-9._-]+)/manifest\.json$"),
    re.compile(r"^/projects/([A-Za-z0-9._-]+)/nodes/(r[0-7]*)\.bin$"),
    re.compile(r"^/projects/([A-Za-z0-9._-]+)/byproduct\.(json|bin)$"),
)


class _Subscriber:
    """Outbound half of one connection; owns the socket writes."""

    def __init__(self, sock: socket.socket):
        self.sock = sock
        self.q: "queue.Queue[Optional[dict]]" = queue.Queue()
        self.alive = True
        self.thread = threading.Thread(target=self._run, daemon=True)
        self.thread.start()

    def send(self, obj: dict) -> None:
        if self.alive:
            self.q.put(obj)

    def close(self) -> None:
        self.q.put(None)

    def _run(self) -> None:
        while True:
            obj = self.q.get()
            if obj is None:
                break
            try:
                self.sock.sendall(
                    (canonical_json(obj) + "\n").encode("utf-8"))
            except OSError:
                self.alive = False
                break


class ProjectRuntime:
    """Single serializer for one project: session + log + fan-out."""

    def __init__(self, cfg: ProjectConfig, snapshot_interval: int = 200):
        self.cfg = cfg.validated()
        self.lock = threading.Lock()
        self.session = recover(cfg.data_dir, cfg.project_id)
        self.oplog = OpLog(cfg.data_dir)
        self.snapshot_interval = max(1, snapshot_interval)
        self._since_snapshot = 0
        self._subs: list[_Subscriber] = []

    # connection lifecycle -------------------------------------------------

    def attach(self, sub: _Subscriber) -> dict:
        """Register for events and return a snapshot at the same sequence."""
        with self.lock:
            self._subs.append(sub)
            return self.session.snapshot()

    def detach(self, sub: _Subscriber) -> None:
        with self.lock:
            if sub in self._subs:
                self._subs.remove(sub)

    # op handling ----------------------------------------------------------

    def handle_op(self, raw_op: dict, user: User, sub: _Subscriber) -> None:
        try:
            op = SessionOp.from_json(raw_op)
        except ValidationFailed as exc:
            sub.send(self._error("ValidationFailed", str(exc)))
            return
        from dataclasses import replace as dc_replace
        op = dc_replace(op, author=user.name)  # server stamps identity

        with self.lock:
            outcome = self.session.apply(op, user.role)
            if outcome.status == "rejected":
                rej = outcome.rejection
                sub.send(self._error(rej.code, rej.detail, rej.current))
                return
            if outcome.status == "accepted":
                # durability before acknowledgement
                self.oplog.append(outcome.event)
                self._since_snapshot += 1
                if self._since_snapshot >= self.snapshot_interval:
                    write_snapshot(self.cfg.data_dir, self.session)
                    self._since_snapshot = 0
                for s in list(self._subs):
                    s.send({"type": "event", "projectId": self.cfg.project_id,
                            "seq": outcome.seq, "op": outcome.event["op"]})
            # duplicates fall through to a plain ack with the original seq
            sub.send({"type": "ack", "projectId": self.cfg.project_id,
                      "seq": outcome.seq})

    def _error(self, code: str, detail: str,
               current: Optional[dict] = None) -> dict:
        err = {"code": code, "detail": detail}
        if current is not None:
            err["current"] = current
        return {"type": "error", "projectId": self.cfg.project_id,
                "error": err}

    def shutdown(self) -> None:
        with self.lock:
            write_snapshot(self.cfg.data_dir, self.session)
            self.oplog.close()
            for s in self._subs:
                s.close()
            self._subs.clear()


class _CollabHandler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        service: CollabService = self.server.service  # type: ignore[attr-defined]
        sub: Optional[_Subscriber] = None
        runtime: Optional[ProjectRuntime] = None
        try:
            hello = self._read()
            if hello is None or hello.get("type") != "hello":
                self._direct({"type": "error", "projectId": "",
                              "error": {"code": "ValidationFailed",
                                        "detail": "expected hello"}})
                return
            project_id = hello.get("projectId", "")
            runtime = service.projects.get(project_id)
            if runtime is None:
                self._direct({"type": "error", "projectId": project_id,
                              "error": {"code": "UnknownTarget",
                                        "detail": f"no project {project_id}"}})
                return
            user = runtime.cfg.authenticate(str(hello.get("token", "")))
            if user is None:
                self._direct({"type": "error", "projectId": project_id,
                              "error": {"code": "Unauthorized",
                                        "detail": "bad token"}})
                return

            sub = _Subscriber(self.connection)
            snapshot = runtime.attach(sub)
            sub.send({"type": "welcome", "projectId": project_id,
                      "seq": snapshot["seq"], "snapshot": snapshot,
                      "user": user.name, "role": user.role.value})

            while True:
                msg = self._read()
                if msg is None or msg.get("type") == "bye":
                    break
                if msg.get("type") == "op" and isinstance(msg.get("op"), dict):
                    runtime.handle_op(msg["op"], user, sub)
                else:
                    sub.send(runtime._error(
                        "ValidationFailed",
                        f"unexpected message type {msg.get('type')!r}"))
        except (OSError, ValueError):
            pass
        finally:
            if runtime is not None and sub is not None:
                runtime.detach(sub)
                sub.close()

    def _read(self) -> Optional[dict]:
        line = self.rfile.readline()
        if not line:
            return None
        try:
            obj = json.loads(line.decode("utf-8"))
        except json.JSONDecodeError:
            return {"type": "malformed"}
        return obj if isinstance(obj, dict) else {"type": "malformed"}

    def _direct(self, obj: dict) -> None:
        try:
            self.connection.sendall(
                (canonical_json(obj) + "\n").encode("utf-8"))
        except OSError:
            pass


class _TileHandler(BaseHTTPRequestHandler):
    def do_GET(self) -> None:  # noqa: N802  (http.server API)
        service: CollabService = self.server.service  # type: ignore[attr-defined]
        for route in _HTTP_ROUTES:
            m = route.match(self.path)
            if not m:
                continue
            runtime = service.projects.get(m.group(1))
            if runtime is None:
                break
            root = runtime.cfg.data_dir
            if self.path.endswith("manifest.json"):
                target = root / "manifest.json"
                ctype = "application/json"
            elif "/nodes/" in self.path:
                code = m.group(2)
                if not _NODE_RE.match(code):
                    break
                target = root / "nodes" / f"{code}.bin"
                ctype = "application/octet-stream"
            else:
                ext = m.group(2)
                target = root / f"byproduct.{ext}"
                ctype = ("application/json" if ext == "json"
                         else "application/octet-stream")
            if not target.is_file():
                break
            data = target.read_bytes()
            self.send_response(200)
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)
            return
        self.send_response(404)
        self.send_header("Content-Length", "0")
        self.end_headers()

    def log_message(self, format: str, *args) -> None:
        log.debug("http: " + format, *args)


class CollabService:
    """Hosts one or more projects over a TCP collab port + an HTTP port.

    Port 0 asks the OS for an ephemeral port; the bound ports are exposed
    as `collab_port` / `http_port` after start().
    """

    def __init__(self, configs: list[ProjectConfig], host: str = "127.0.0.1",
                 collab_port: int = 0, http_port: int = 0,
                 snapshot_interval: int = 200):
        self.projects = {cfg.project_id: ProjectRuntime(cfg, snapshot_interval)
                         for cfg in configs}
        self._tcp = socketserver.ThreadingTCPServer(
            (host, collab_port), _CollabHandler, bind_and_activate=False)
        self._tcp.allow_reuse_address = True
        self._tcp.daemon_threads = True
        self._tcp.service = self  # type: ignore[attr-defined]
        self._tcp.server_bind()
        self._tcp.server_activate()
        self._http = ThreadingHTTPServer((host, http_port), _TileHandler)
        self._http.daemon_threads = True
        self._http.service = self  # type: ignore[attr-defined]
        self._threads: list[threading.Thread] = []

    @property
    def collab_port(self) -> int:
        return self._tcp.server_address[1]

    @property
    def http_port(self) -> int:
        return self._http.server_address[1]

    def start(self) -> None:
        for srv in (self._tcp, self._http):
            t = threading.Thread(target=srv.serve_forever,
                                 kwargs={"poll_interval": 0.05}, daemon=True)
            t.start()
            self._threads.append(t)
        log.info("collab on :%d, tiles on :%d",
                 self.collab_port, self.http_port)

    def stop(self) -> None:
        self._tcp.shutdown()
        self._http.shutdown()
        self._tcp.server_close()
        self._http.server_close()
        for runtime in self.projects.values():
            runtime.shutdown()
        for t in self._threads:
            t.join(timeout=5)
        self._threads.clear()

    def __enter__(self) -> "CollabService":
        self.start()
        return self

    def __exit__(self, *exc) -> None:
        self.stop()
