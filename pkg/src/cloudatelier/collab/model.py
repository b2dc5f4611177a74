"""Session state machine for collaborative annotation.

One Session instance is the single serializer for a project: the server
applies ops through `apply` (validation + versioning + broadcast event),
while replicas reconstruct identical state by feeding the broadcast events
to `apply_event`. Both paths share `_execute`, so convergence is by
construction rather than by parallel implementations.

Live layers are owned by their creator; contributors may only write their
own layers, curators may write any. The base point cloud is never touched
by anything in this module.
"""
from __future__ import annotations

import hashlib
import json
import uuid
from dataclasses import dataclass
from enum import Enum
from typing import Any, Optional

from ..errors import ValidationFailed
from ..measure.jsonio import (
    canonical_json,
    document_to_obj,
    series_from_obj,
    series_to_obj,
)
from ..measure.model import LayerDocument, MeasurementSeries

_IMPORT_NS = uuid.UUID("6ba05c73-49b6-4f9f-9f69-6f5bcafb4b39")


class Role(str, Enum):
    CURATOR = "curator"
    CONTRIBUTOR = "contributor"
    VIEWER = "viewer"


class OpAction(str, Enum):
    CREATE_LAYER = "createLayer"
    CREATE_SERIES = "createSeries"
    UPDATE_SERIES = "updateSeries"
    DELETE_SERIES = "deleteSeries"
    DELETE_LAYER = "deleteLayer"
    COMMIT_LAYER = "commitLayer"
    IMPORT_LAYER = "importLayer"


@dataclass(frozen=True)
class SessionOp:
    client_id: str
    client_seq: int
    action: OpAction
    layer_id: str
    series_id: Optional[str] = None
    payload: Optional[dict] = None
    base_version: Optional[int] = None
    author: str = ""  # stamped by the server from the authenticated user

    @property
    def op_id(self) -> tuple[str, int]:
        return (self.client_id, self.client_seq)

    def to_json(self) -> dict:
        obj: dict[str, Any] = {
            "opId": [self.client_id, self.client_seq],
            "action": self.action.value,
            "target": {"layer": self.layer_id, "series": self.series_id},
            "payload": self.payload,
            "author": self.author,
        }
        if self.base_version is not None:
            obj["baseVersion"] = self.base_version
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "SessionOp":
        try:
            client_id, client_seq = obj["opId"]
            action = OpAction(obj["action"])
            target = obj["target"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationFailed(f"malformed op: {exc}") from exc
        if not isinstance(client_id, str) or not isinstance(client_seq, int):
            raise ValidationFailed("opId must be [string clientId, int seq]")
        if not isinstance(target, dict) or not isinstance(
                target.get("layer"), str):
            raise ValidationFailed("op target needs a layer id")
        return cls(
            client_id=client_id,
            client_seq=client_seq,
            action=action,
            layer_id=target["layer"],
            series_id=target.get("series"),
            payload=obj.get("payload"),
            base_version=obj.get("baseVersion"),
            author=obj.get("author", ""),
        )


@dataclass(frozen=True)
class Rejection:
    code: str  # StaleVersion | Unauthorized | UnknownTarget | ValidationFailed
    detail: str
    current: Optional[dict] = None  # serialized series for StaleVersion

    def to_json(self) -> dict:
        obj = {"code": self.code, "detail": self.detail}
        if self.current is not None:
            obj["current"] = self.current
        return obj


@dataclass(frozen=True)
class Outcome:
    status: str  # "accepted" | "duplicate" | "rejected"
    seq: Optional[int] = None
    event: Optional[dict] = None
    rejection: Optional[Rejection] = None

    @property
    def accepted(self) -> bool:
        return self.status == "accepted"


@dataclass
class _LiveLayer:
    doc: LayerDocument
    owner: str


class Session:
    def __init__(self, project_id: str):
        self.project_id = project_id
        self.baseline: list[dict] = []  # {"owner": str, "doc": LayerDocument, "seq": int}
        self.live: dict[str, _LiveLayer] = {}
        self.layer_tombstones: set[str] = set()
        self.series_tombstones: dict[str, set[str]] = {}
        self.seq = 0
        self.applied: dict[tuple[str, int], int] = {}
        self.client_max: dict[str, int] = {}  # highest applied seq per client

    # --- hashing / snapshot ---------------------------------------------------

    def state_obj(self) -> dict:
        return {
            "projectId": self.project_id,
            "seq": self.seq,
            "baseline": [{"owner": b["owner"], "seq": b["seq"],
                          "doc": document_to_obj(b["doc"])}
                         for b in self.baseline],
            "live": {lid: {"owner": l.owner, "doc": document_to_obj(l.doc)}
                     for lid, l in self.live.items()},
            "layerTombstones": sorted(self.layer_tombstones),
            "seriesTombstones": {k: sorted(v) for k, v
                                 in self.series_tombstones.items() if v},
        }

    def state_hash(self) -> str:
        return hashlib.sha256(
            canonical_json(self.state_obj()).encode("utf-8")).hexdigest()

    def snapshot(self) -> dict:
        doc = self.state_obj()
        doc["appliedOps"] = {
            f"{cid}:{cseq}": sseq for (cid, cseq), sseq in self.applied.items()}
        return doc

    @classmethod
    def from_snapshot(cls, doc: dict) -> "Session":
        from ..measure.jsonio import import_layer_json

        def doc_from_obj(obj: dict) -> LayerDocument:
            return import_layer_json(json.dumps(obj))

        s = cls(doc["projectId"])
        s.seq = doc["seq"]
        for b in doc.get("baseline", []):
            s.baseline.append({"owner": b["owner"], "seq": b["seq"],
                               "doc": doc_from_obj(b["doc"])})
        for lid, entry in doc.get("live", {}).items():
            s.live[lid] = _LiveLayer(doc=doc_from_obj(entry["doc"]),
                                     owner=entry["owner"])
        s.layer_tombstones = set(doc.get("layerTombstones", []))
        s.series_tombstones = {k: set(v) for k, v
                               in doc.get("seriesTombstones", {}).items()}
        for key, sseq in doc.get("appliedOps", {}).items():
            cid, _, cseq = key.rpartition(":")
            s.note_applied(cid, int(cseq), sseq)
        return s

    def note_applied(self, client_id: str, client_seq: int, seq: int) -> None:
        self.applied[(client_id, client_seq)] = seq
        if client_seq > self.client_max.get(client_id, -1):
            self.client_max[client_id] = client_seq

    # --- lookups ----------------------------------------------------------------

    def _frozen_ids(self) -> set[str]:
        return {b["doc"].id for b in self.baseline}

    def find_series(self, layer_id: str,
                    series_id: str) -> Optional[MeasurementSeries]:
        layer = self.live.get(layer_id)
        return layer.doc.get(series_id) if layer else None

    def export_layer(self, layer_id: str) -> str:
        """Canonical JSON for a live or committed layer."""
        from ..measure.jsonio import export_layer_json

        layer = self.live.get(layer_id)
        if layer is not None:
            return export_layer_json(layer.doc)
        for b in self.baseline:
            if b["doc"].id == layer_id:
                return export_layer_json(b["doc"])
        raise KeyError(f"no layer {layer_id}")

    # --- server-side apply --------------------------------------------------------

    def apply(self, op: SessionOp, role: Role) -> Outcome:
        if op.op_id in self.applied:
            # idempotence: ack with the sequence the op got the first time
            return Outcome("duplicate", seq=self.applied[op.op_id])
        if op.client_seq <= self.client_max.get(op.client_id, -1):
            return Outcome("rejected", rejection=Rejection(
                "ValidationFailed",
                f"client sequence {op.client_seq} is not increasing"))

        rejection = self._check(op, role)
        if rejection is not None:
            return Outcome("rejected", rejection=rejection)

        if op.action is OpAction.IMPORT_LAYER:
            op = self._rewrite_import(op)

        self.seq += 1
        self.note_applied(op.client_id, op.client_seq, self.seq)
        self._execute(op)
        event = {"seq": self.seq, "op": op.to_json()}
        return Outcome("accepted", seq=self.seq, event=event)

    def _check(self, op: SessionOp, role: Role) -> Optional[Rejection]:
        if role is Role.VIEWER:
            return Rejection("Unauthorized", "viewers cannot write")
        if op.action is OpAction.COMMIT_LAYER and role is not Role.CURATOR:
            return Rejection("Unauthorized", "only curators commit layers")

        frozen = self._frozen_ids()
        layer = self.live.get(op.layer_id)

        if op.action in (OpAction.CREATE_LAYER, OpAction.IMPORT_LAYER):
            if op.action is OpAction.CREATE_LAYER:
                if op.layer_id in frozen or layer is not None:
                    return Rejection("StaleVersion",
                                     f"layer {op.layer_id} already exists")
                if op.layer_id in self.layer_tombstones:
                    return Rejection("StaleVersion",
                                     f"layer id {op.layer_id} is tombstoned")
                try:
                    uuid.UUID(op.layer_id)
                except ValueError:
                    return Rejection("ValidationFailed",
                                     f"layer id {op.layer_id!r} is not a UUID")
            else:
                try:
                    self._parse_import_payload(op)
                except ValidationFailed as exc:
                    return Rejection("ValidationFailed", str(exc))
            return None

        if layer is None:
            if op.layer_id in frozen:
                return Rejection("Unauthorized",
                                 f"layer {op.layer_id} is frozen in the baseline")
            return Rejection("UnknownTarget", f"no live layer {op.layer_id}")
        if role is not Role.CURATOR and layer.owner != op.author:
            return Rejection("Unauthorized",
                             f"layer {op.layer_id} belongs to {layer.owner}")

        if op.action in (OpAction.DELETE_LAYER, OpAction.COMMIT_LAYER):
            return None

        # series-level actions
        if not isinstance(op.series_id, str):
            return Rejection("ValidationFailed", "op target needs a series id")
        stones = self.series_tombstones.get(op.layer_id, set())
        stored = layer.doc.get(op.series_id)

        if op.action is OpAction.CREATE_SERIES:
            if op.series_id in stones:
                return Rejection("StaleVersion",
                                 f"series id {op.series_id} is tombstoned")
            if stored is not None:
                return Rejection("StaleVersion",
                                 f"series {op.series_id} already exists",
                                 current=series_to_obj(stored))
            series = self._parse_series_payload(op)
            if isinstance(series, Rejection):
                return series
            if series.version != 1:
                return Rejection("ValidationFailed",
                                 "created series must carry version 1")
            return None

        if stored is None:
            return Rejection("UnknownTarget",
                             f"no series {op.series_id} in layer {op.layer_id}")

        if op.action is OpAction.UPDATE_SERIES:
            series = self._parse_series_payload(op)
            if isinstance(series, Rejection):
                return series
            if series.version != stored.version + 1:
                return Rejection(
                    "StaleVersion",
                    f"series {op.series_id} is at version {stored.version}, "
                    f"update carried {series.version}",
                    current=series_to_obj(stored))
        return None

    def _parse_series_payload(self, op: SessionOp):
        if not isinstance(op.payload, dict):
            return Rejection("ValidationFailed", "op needs a series payload")
        try:
            series = series_from_obj(op.payload)
        except ValidationFailed as exc:
            return Rejection("ValidationFailed", str(exc))
        if series.id != op.series_id:
            return Rejection("ValidationFailed",
                             "payload series id does not match the target")
        return series

    def _parse_import_payload(self, op: SessionOp) -> LayerDocument:
        from ..measure.jsonio import import_layer_json
        if not isinstance(op.payload, dict):
            raise ValidationFailed("import needs a layer document payload")
        return import_layer_json(json.dumps(op.payload))

    def _rewrite_import(self, op: SessionOp) -> SessionOp:
        """Re-key an imported document with fresh deterministic ids."""
        from dataclasses import replace as dc_replace

        original = self._parse_import_payload(op)
        stamp = f"{self.project_id}:{op.client_id}:{op.client_seq}"
        new_layer_id = str(uuid.uuid5(_IMPORT_NS, f"{stamp}:layer"))
        new_series = []
        for s in original.series:
            new_id = str(uuid.uuid5(_IMPORT_NS, f"{stamp}:series:{s.id}"))
            extras = dict(s.extras)
            extras["importedFrom"] = s.id
            new_series.append(dc_replace(s, id=new_id, extras=extras))
        extras = dict(original.extras)
        extras["importedFrom"] = original.id
        rewritten = dc_replace(original, id=new_layer_id,
                               series=tuple(new_series), extras=extras)
        obj = document_to_obj(rewritten)
        return dc_replace(op, layer_id=new_layer_id, payload=obj)

    # --- deterministic state mutation (shared with replicas) ------------------------

    def _execute(self, op: SessionOp) -> None:
        from dataclasses import replace as dc_replace

        if op.action is OpAction.CREATE_LAYER:
            name = ""
            if isinstance(op.payload, dict):
                name = str(op.payload.get("name", ""))
            self.live[op.layer_id] = _LiveLayer(
                doc=LayerDocument(id=op.layer_id, name=name), owner=op.author)
            return

        if op.action is OpAction.IMPORT_LAYER:
            doc = self._parse_import_payload(op)
            self.live[op.layer_id] = _LiveLayer(doc=doc, owner=op.author)
            return

        if op.action is OpAction.DELETE_LAYER:
            del self.live[op.layer_id]
            self.layer_tombstones.add(op.layer_id)
            self.series_tombstones.pop(op.layer_id, None)
            return

        if op.action is OpAction.COMMIT_LAYER:
            layer = self.live.pop(op.layer_id)
            self.baseline.append({"owner": layer.owner, "doc": layer.doc,
                                  "seq": self.seq})
            return

        layer = self.live[op.layer_id]
        if op.action is OpAction.CREATE_SERIES:
            series = series_from_obj(op.payload)
            layer.doc = dc_replace(layer.doc,
                                   series=layer.doc.series + (series,))
            return

        if op.action is OpAction.UPDATE_SERIES:
            series = series_from_obj(op.payload)
            layer.doc = dc_replace(layer.doc, series=tuple(
                series if s.id == op.series_id else s
                for s in layer.doc.series))
            return

        if op.action is OpAction.DELETE_SERIES:
            layer.doc = dc_replace(layer.doc, series=tuple(
                s for s in layer.doc.series if s.id != op.series_id))
            self.series_tombstones.setdefault(op.layer_id,
                                              set()).add(op.series_id)
            return

        raise AssertionError(f"unhandled action {op.action}")

    # --- replica side ------------------------------------------------------------

    def apply_event(self, event: dict) -> None:
        """Apply a broadcast event; events must arrive in sequence order."""
        seq = event["seq"]
        if seq != self.seq + 1:
            raise ValueError(f"event {seq} out of order, state at {self.seq}")
        op = SessionOp.from_json(event["op"])
        self.seq = seq  # _execute reads seq when freezing a commit
        self._execute(op)


class Replica:
    """Client-side state mirror with a hold-back buffer for event gaps."""

    def __init__(self, snapshot: Optional[dict] = None,
                 project_id: str = ""):
        if snapshot is not None:
            self.session = Session.from_snapshot(snapshot)
        else:
            self.session = Session(project_id)
        self._pending: dict[int, dict] = {}

    @property
    def seq(self) -> int:
        return self.session.seq

    def ingest(self, event: dict) -> int:
        """Buffer and apply in order; returns how many events were applied."""
        seq = event["seq"]
        if seq <= self.session.seq:
            return 0  # already covered by the snapshot or a duplicate
        self._pending[seq] = event
        applied = 0
        while self.session.seq + 1 in self._pending:
            self.session.apply_event(self._pending.pop(self.session.seq + 1))
            applied += 1
        return applied

    def state_hash(self) -> str:
        return self.session.state_hash()
