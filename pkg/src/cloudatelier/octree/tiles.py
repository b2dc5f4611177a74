"""Per-node tile encoding: 18-byte little-endian records, positions as
float32 offsets from the node's min corner."""
from __future__ import annotations

import os

import numpy as np

from ..core import POINT_DTYPE, Aabb
from ..errors import TileCorrupt, UnknownNode
from .manifest import TILE_RECORD_SIZE, IndexManifest

TILE_DTYPE = np.dtype([
    ("x", "<f4"), ("y", "<f4"), ("z", "<f4"),
    ("r", "u1"), ("g", "u1"), ("b", "u1"),
    ("intensity", "<u2"),
    ("classification", "u1"),
])
assert TILE_DTYPE.itemsize == TILE_RECORD_SIZE


def encode_tile(points: np.ndarray, box: Aabb) -> bytes:
    """Pack POINT_DTYPE records relative to the node box, clamped inside."""
    out = np.empty(len(points), dtype=TILE_DTYPE)
    for i, axis in enumerate(("x", "y", "z")):
        rel = (points[axis] - box.min[i]).astype(np.float32)
        edge64 = box.max[i] - box.min[i]
        edge = np.float32(edge64)
        if float(edge) > edge64:  # keep decoded positions inside the box
            edge = np.nextafter(edge, np.float32(0))
        out[axis] = np.clip(rel, np.float32(0.0), edge)
    for f in ("r", "g", "b", "intensity", "classification"):
        out[f] = points[f]
    return out.tobytes()


def decode_tile(data: bytes, box: Aabb) -> np.ndarray:
    """Unpack tile bytes back to absolute-position POINT_DTYPE records."""
    if len(data) % TILE_DTYPE.itemsize:
        raise TileCorrupt(f"tile length {len(data)} is not a record multiple")
    raw = np.frombuffer(data, dtype=TILE_DTYPE)
    out = np.empty(len(raw), dtype=POINT_DTYPE)
    for i, axis in enumerate(("x", "y", "z")):
        out[axis] = raw[axis].astype(np.float64) + box.min[i]
    for f in ("r", "g", "b", "intensity", "classification"):
        out[f] = raw[f]
    return out


def read_node(manifest: IndexManifest, code: str) -> np.ndarray:
    """Decode one node's stored points (absolute positions)."""
    node = manifest.nodes.get(code)
    if node is None:
        raise UnknownNode(f"node {code!r} not in manifest")
    path = manifest.tile_path(code)
    if not path.exists():
        raise TileCorrupt(f"{path}: tile file missing")
    expected = node.count * TILE_DTYPE.itemsize
    actual = os.path.getsize(path)
    if actual != expected:
        raise TileCorrupt(
            f"{path}: {actual} bytes but manifest says {node.count} records "
            f"({expected} bytes)")
    return decode_tile(path.read_bytes(), node.aabb)
