"""Canonical JSON interchange for layer documents.

Exports are byte-stable: sorted keys, compact separators, shortest
round-trip floats. Unknown fields found at import are kept opaquely and
re-emitted on the next export.
"""
from __future__ import annotations

import json
import math
from typing import Any, Mapping

from ..errors import (
    SchemaVersionUnsupported,
    UnsupportedFormat,
    ValidationFailed,
)
from .model import LayerDocument, MeasurementSeries, SeriesKind, Vertex3

SCHEMA_TAG = "measure/1"

_VERTEX_KEYS = {"position", "snapped", "snapNode"}
_SERIES_KEYS = {"id", "kind", "label", "color", "version", "author",
                "vertices", "profileWidth", "boxExtent", "yaw"}
_DOC_KEYS = {"schema", "id", "name", "baseVersion", "planeRefs", "series"}


def canonical_json(value: Any) -> str:
    return json.dumps(value, sort_keys=True, separators=(",", ":"),
                      ensure_ascii=False, allow_nan=False)


def _vertex_to_obj(v: Vertex3) -> dict:
    obj = dict(v.extras)
    obj["position"] = [float(c) for c in v.position]
    obj["snapped"] = bool(v.snapped)
    if v.snap_node is not None:
        obj["snapNode"] = v.snap_node
    return obj


def series_to_obj(s: MeasurementSeries) -> dict:
    obj = dict(s.extras)
    obj.update({
        "id": s.id,
        "kind": s.kind.value,
        "label": s.label,
        "color": [int(c) for c in s.color],
        "version": int(s.version),
        "author": s.author,
        "vertices": [_vertex_to_obj(v) for v in s.vertices],
    })
    if s.profile_width is not None:
        obj["profileWidth"] = float(s.profile_width)
    if s.box_extent is not None:
        obj["boxExtent"] = [float(e) for e in s.box_extent]
        obj["yaw"] = float(s.yaw)
    return obj


def document_to_obj(doc: LayerDocument) -> dict:
    obj = dict(doc.extras)
    obj.update({
        "schema": SCHEMA_TAG,
        "id": doc.id,
        "name": doc.name,
        "baseVersion": int(doc.base_version),
        "planeRefs": list(doc.plane_refs),
        "series": [series_to_obj(s) for s in doc.series],
    })
    return obj


def export_layer_json(doc: LayerDocument) -> bytes:
    doc.validate()
    return (canonical_json(document_to_obj(doc)) + "\n").encode("utf-8")


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ValidationFailed(message)


def _as_float(value: Any, what: str) -> float:
    _require(isinstance(value, (int, float)) and not isinstance(value, bool),
             f"{what} must be a number")
    out = float(value)
    _require(math.isfinite(out), f"{what} must be finite")
    return out


def _vertex_from_obj(obj: Any) -> Vertex3:
    _require(isinstance(obj, Mapping), "vertex must be an object")
    _require("position" in obj, "vertex needs a position")
    pos = obj["position"]
    _require(isinstance(pos, (list, tuple)) and len(pos) == 3,
             "vertex position must have 3 coordinates")
    position = tuple(_as_float(c, "vertex coordinate") for c in pos)
    snapped = obj.get("snapped", False)
    _require(isinstance(snapped, bool), "vertex snapped must be a boolean")
    snap_node = obj.get("snapNode")
    if snap_node is not None:
        _require(isinstance(snap_node, str), "snapNode must be a string")
    extras = {k: v for k, v in obj.items() if k not in _VERTEX_KEYS}
    return Vertex3(position=position, snapped=snapped, snap_node=snap_node,
                   extras=extras)


def series_from_obj(obj: Any) -> MeasurementSeries:
    _require(isinstance(obj, Mapping), "series must be an object")
    _require(isinstance(obj.get("id"), str), "series needs a string id")
    kind_raw = obj.get("kind")
    try:
        kind = SeriesKind(kind_raw)
    except ValueError:
        raise ValidationFailed(f"unknown series kind {kind_raw!r}")
    vertices_raw = obj.get("vertices")
    _require(isinstance(vertices_raw, list), "series needs a vertices array")
    vertices = tuple(_vertex_from_obj(v) for v in vertices_raw)
    label = obj.get("label", "")
    _require(isinstance(label, str), "label must be a string")
    color_raw = obj.get("color", [255, 255, 0])
    _require(isinstance(color_raw, (list, tuple)) and len(color_raw) == 3,
             "color must be a 3-component array")
    color = []
    for c in color_raw:
        _require(isinstance(c, int) and not isinstance(c, bool)
                 and 0 <= c <= 255, "color components must be ints in 0..255")
        color.append(c)
    version = obj.get("version", 1)
    _require(isinstance(version, int) and not isinstance(version, bool)
             and version >= 0, "version must be a non-negative integer")
    author = obj.get("author", "")
    _require(isinstance(author, str), "author must be a string")
    profile_width = obj.get("profileWidth")
    if profile_width is not None:
        profile_width = _as_float(profile_width, "profileWidth")
    box_extent = obj.get("boxExtent")
    if box_extent is not None:
        _require(isinstance(box_extent, (list, tuple)) and len(box_extent) == 3,
                 "boxExtent must be a 3-component array")
        box_extent = tuple(_as_float(e, "boxExtent component")
                           for e in box_extent)
    yaw = _as_float(obj.get("yaw", 0.0), "yaw")
    extras = {k: v for k, v in obj.items() if k not in _SERIES_KEYS}
    series = MeasurementSeries(
        id=obj["id"], kind=kind, vertices=vertices, label=label,
        color=tuple(color), version=version, author=author,
        profile_width=profile_width, box_extent=box_extent, yaw=yaw,
        extras=extras)
    series.validate()
    return series


def import_layer_json(data: bytes | str) -> LayerDocument:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ValidationFailed(f"not valid JSON: {exc}") from exc
    _require(isinstance(obj, Mapping), "document must be a JSON object")
    tag = obj.get("schema")
    if tag != SCHEMA_TAG:
        raise SchemaVersionUnsupported(
            f"unsupported layer schema {tag!r} (expected {SCHEMA_TAG!r})")
    _require(isinstance(obj.get("id"), str), "layer needs a string id")
    name = obj.get("name", "")
    _require(isinstance(name, str), "layer name must be a string")
    base_version = obj.get("baseVersion", 0)
    _require(isinstance(base_version, int) and not isinstance(base_version, bool)
             and base_version >= 0,
             "baseVersion must be a non-negative integer")
    plane_refs_raw = obj.get("planeRefs", [])
    _require(isinstance(plane_refs_raw, list), "planeRefs must be an array")
    for ref in plane_refs_raw:
        _require(isinstance(ref, str), "plane references must be strings")
    series_raw = obj.get("series", [])
    _require(isinstance(series_raw, list), "series must be an array")
    extras = {k: v for k, v in obj.items() if k not in _DOC_KEYS}
    doc = LayerDocument(
        id=obj["id"], name=name, base_version=base_version,
        series=tuple(series_from_obj(s) for s in series_raw),
        plane_refs=tuple(plane_refs_raw), extras=extras)
    doc.validate()
    return doc


def export_layer(doc: LayerDocument, format: str = "json") -> bytes:
    from .dxf import export_layer_dxf
    fmt = format.lower()
    if fmt == "json":
        return export_layer_json(doc)
    if fmt == "dxf":
        return export_layer_dxf(doc)
    raise UnsupportedFormat(f"unknown export format {format!r}")


def import_layer(data: bytes | str, format: str = "json") -> LayerDocument:
    fmt = format.lower()
    if fmt == "json":
        return import_layer_json(data)
    if fmt == "dxf":
        raise UnsupportedFormat("DXF import is not supported; use JSON")
    raise UnsupportedFormat(f"unknown import format {format!r}")
