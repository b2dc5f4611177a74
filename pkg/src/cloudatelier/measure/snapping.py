"""Vertex snapping against an octree index."""
from __future__ import annotations

from typing import Iterable, Optional, Sequence

import numpy as np

from ..octree.manifest import IndexManifest
from ..octree.tiles import read_node
from .model import Vertex3


def snap(query: Sequence[float], radius: float, manifest: IndexManifest,
         within: Optional[Iterable[str]] = None) -> Vertex3:
    """Nearest stored point within `radius` of `query`, or the raw position.

    Scans every node whose box intersects the query ball (optionally
    restricted to `within`, e.g. the currently loaded subset). Ties break on
    (distance, node code, in-node index), so the result is deterministic.
    The returned position is the decoded stored point, bit for bit.
    """
    if radius <= 0:
        raise ValueError("radius must be > 0")
    q = np.asarray(query, dtype=np.float64)
    codes = manifest.nodes.keys() if within is None else (
        c for c in within if c in manifest.nodes)
    best = None  # (distance, code, index, position)
    for code in sorted(codes):
        node = manifest.nodes[code]
        if node.aabb.distance_to(tuple(q)) > radius:
            continue
        pts = read_node(manifest, code)
        pos = np.stack([pts["x"], pts["y"], pts["z"]], axis=1)
        d = np.linalg.norm(pos - q, axis=1)
        i = int(np.argmin(d))  # argmin takes the first hit: in-node tie-break
        if d[i] <= radius:
            key = (float(d[i]), code, i)
            if best is None or key < best[0]:
                best = (key, tuple(float(c) for c in pos[i]))
    if best is None:
        return Vertex3(position=tuple(float(c) for c in q), snapped=False)
    (_, code, _), position = best
    return Vertex3(position=position, snapped=True, snap_node=code)
