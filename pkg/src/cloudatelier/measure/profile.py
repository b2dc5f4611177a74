"""Corridor profile extraction: project indexed points onto a polyline."""
from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from ..errors import DegenerateGeometry
from ..octree.manifest import IndexManifest, level_of
from ..octree.tiles import read_node
from .model import Vertex3

PROFILE_DTYPE = np.dtype([
    ("mileage", "<f8"), ("elevation", "<f8"), ("lateral", "<f8"),
    ("x", "<f8"), ("y", "<f8"), ("z", "<f8"),
    ("r", "u1"), ("g", "u1"), ("b", "u1"),
    ("intensity", "<u2"), ("classification", "u1"),
])


def _polyline_xy(polyline) -> np.ndarray:
    rows = []
    for v in polyline:
        pos = v.position if isinstance(v, Vertex3) else v
        rows.append((float(pos[0]), float(pos[1])))
    return np.array(rows, dtype=np.float64)


def project_to_polyline(px: np.ndarray, py: np.ndarray, xy: np.ndarray):
    """Per point: (distance to polyline, mileage, signed lateral offset).

    Lateral sign follows the segment direction: positive to the left
    (cross(direction, offset) z-component). Ties between segments go to the
    earlier segment. Zero-length segments are skipped.
    """
    deltas = np.diff(xy, axis=0)
    seg_len = np.hypot(deltas[:, 0], deltas[:, 1])
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    best_d2 = np.full(px.shape, np.inf)
    best_mileage = np.zeros(px.shape)
    best_lateral = np.zeros(px.shape)
    for k in range(len(deltas)):
        length = seg_len[k]
        if length == 0.0:
            continue
        ax, ay = xy[k]
        dx, dy = deltas[k]
        t = ((px - ax) * dx + (py - ay) * dy) / (length * length)
        np.clip(t, 0.0, 1.0, out=t)
        fx = ax + t * dx
        fy = ay + t * dy
        d2 = (px - fx) ** 2 + (py - fy) ** 2
        better = d2 < best_d2
        if better.any():
            best_d2[better] = d2[better]
            best_mileage[better] = cum[k] + t[better] * length
            best_lateral[better] = (dx * (py[better] - ay)
                                    - dy * (px[better] - ax)) / length
    return np.sqrt(best_d2), best_mileage, best_lateral


def extract_profile(polyline: Sequence, width: float,
                    manifest: IndexManifest,
                    depth_limit: Optional[int] = None) -> np.ndarray:
    """All indexed points within width/2 (horizontally) of the polyline.

    Returns a PROFILE_DTYPE array sorted by mileage; elevation is the raw z.
    `depth_limit` bounds the octree level that is scanned (None = all).
    """
    if not width > 0:
        raise ValueError("width must be > 0")
    xy = _polyline_xy(polyline)
    if len(xy) < 2:
        raise DegenerateGeometry("profile polyline needs at least 2 vertices")
    seg_len = np.hypot(*np.diff(xy, axis=0).T)
    if float(seg_len.sum()) == 0.0:
        raise DegenerateGeometry("profile polyline has zero horizontal length")

    half = width / 2.0
    lo = xy.min(axis=0) - half
    hi = xy.max(axis=0) + half
    out = []
    for code in sorted(manifest.nodes):
        if depth_limit is not None and level_of(code) > depth_limit:
            continue
        box = manifest.nodes[code].aabb
        if (box.min[0] > hi[0] or box.max[0] < lo[0]
                or box.min[1] > hi[1] or box.max[1] < lo[1]):
            continue
        pts = read_node(manifest, code)
        dist, mileage, lateral = project_to_polyline(
            pts["x"].astype(np.float64), pts["y"].astype(np.float64), xy)
        keep = dist <= half
        if not keep.any():
            continue
        rows = np.empty(int(keep.sum()), dtype=PROFILE_DTYPE)
        rows["mileage"] = mileage[keep]
        rows["elevation"] = pts["z"][keep]
        rows["lateral"] = lateral[keep]
        for f in ("x", "y", "z", "r", "g", "b", "intensity", "classification"):
            rows[f] = pts[f][keep]
        out.append(rows)
    if not out:
        return np.empty(0, dtype=PROFILE_DTYPE)
    table = np.concatenate(out)
    return table[np.argsort(table["mileage"], kind="stable")]
