"""Byproduct serialization: decimated cloud + plane assignments.

`byproduct.bin` holds one 20-byte record per decimated point: the 18-byte
tile layout (positions float32, relative to the index root box min) plus a
trailing u16 plane index (0 = unassigned, i = i-th plane in byproduct.json
order). `byproduct.json` carries the planes and the parameters used.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from ..core import POINT_DTYPE, Aabb
from ..errors import TileCorrupt
from ..measure.jsonio import canonical_json
from ..octree.tiles import TILE_DTYPE
from .segment import Plane, SegmentationResult, SegmenterConfig

BYPRODUCT_DTYPE = np.dtype(TILE_DTYPE.descr + [("plane", "<u2")])
assert BYPRODUCT_DTYPE.itemsize == 20

JSON_NAME = "byproduct.json"
BIN_NAME = "byproduct.bin"


def write_byproduct(directory: Path | str, result: SegmentationResult,
                    box: Aabb) -> None:
    directory = Path(directory)
    points = result.points
    out = np.empty(len(points), dtype=BYPRODUCT_DTYPE)
    for i, axis in enumerate(("x", "y", "z")):
        rel = (points[axis] - box.min[i]).astype(np.float32)
        out[axis] = np.clip(rel, np.float32(0.0),
                            np.float32(box.max[i] - box.min[i]))
    for f in ("r", "g", "b", "intensity", "classification"):
        out[f] = points[f]
    out["plane"] = result.assignment
    (directory / BIN_NAME).write_bytes(out.tobytes())

    doc = {
        "version": "1",
        "seed": int(result.seed),
        "epsilon": float(result.config.epsilon),
        "minInliers": int(result.config.min_inliers),
        "aabb": box.to_json(),
        "pointCount": int(len(points)),
        "planes": [p.to_json() for p in result.planes],
    }
    (directory / JSON_NAME).write_text(canonical_json(doc) + "\n",
                                       encoding="utf-8")


def read_byproduct(directory: Path | str):
    """Returns (points, assignment, planes, meta dict)."""
    import json

    directory = Path(directory)
    meta = json.loads((directory / JSON_NAME).read_text(encoding="utf-8"))
    if meta.get("version") != "1":
        raise TileCorrupt(f"unsupported byproduct version {meta.get('version')!r}")
    box = Aabb.from_json(meta["aabb"])
    data = (directory / BIN_NAME).read_bytes()
    if len(data) % BYPRODUCT_DTYPE.itemsize:
        raise TileCorrupt(
            f"byproduct.bin length {len(data)} is not a record multiple")
    raw = np.frombuffer(data, dtype=BYPRODUCT_DTYPE)
    if len(raw) != meta["pointCount"]:
        raise TileCorrupt(
            f"byproduct.bin has {len(raw)} records, json says "
            f"{meta['pointCount']}")
    points = np.empty(len(raw), dtype=POINT_DTYPE)
    for i, axis in enumerate(("x", "y", "z")):
        points[axis] = raw[axis].astype(np.float64) + box.min[i]
    for f in ("r", "g", "b", "intensity", "classification"):
        points[f] = raw[f]
    planes = tuple(Plane.from_json(p) for p in meta["planes"])
    bad = raw["plane"] > len(planes)
    if bad.any():
        raise TileCorrupt("byproduct.bin references a plane index that is "
                          "not in byproduct.json")
    return points, raw["plane"].copy(), planes, meta
