"""Sequential RANSAC plane extraction with least-squares refit.

Runs on the decimated byproduct cloud. Every random draw comes from one
seeded generator consumed in a fixed order, so results are reproducible
bit for bit for a given (points, cfg).
"""
from __future__ import annotations

import uuid
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..core import Aabb
from ..errors import TooFewPoints
from ..measure.model import Vertex3

_PLANE_NS = uuid.UUID("b1a57f3e-52ff-4241-9fe3-a6c40ab21702")


@dataclass(frozen=True)
class SegmenterConfig:
    epsilon: float = 0.01
    min_inliers: int = 100
    max_planes: int = 64
    iterations_per_plane: int = 256
    seed: int = 0

    def validated(self) -> "SegmenterConfig":
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        if self.min_inliers < 3:
            raise ValueError("min_inliers must be >= 3")
        if not 1 <= self.max_planes <= 65535:  # plane index is a u16
            raise ValueError("max_planes must be in 1..65535")
        if self.iterations_per_plane < 1:
            raise ValueError("iterations_per_plane must be >= 1")
        return self


@dataclass(frozen=True)
class Plane:
    id: str
    normal: tuple[float, float, float]
    d: float
    inlier_count: int
    aabb: Aabb
    rms_residual: float

    def distance(self, position) -> float:
        n = np.asarray(self.normal)
        return float(abs(np.dot(n, np.asarray(position, dtype=np.float64))
                         - self.d))

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "normal": list(self.normal),
            "d": self.d,
            "inlierCount": self.inlier_count,
            "aabb": self.aabb.to_json(),
            "rmsResidual": self.rms_residual,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Plane":
        return cls(id=obj["id"], normal=tuple(obj["normal"]), d=obj["d"],
                   inlier_count=obj["inlierCount"],
                   aabb=Aabb.from_json(obj["aabb"]),
                   rms_residual=obj["rmsResidual"])


@dataclass(frozen=True)
class SegmentationResult:
    points: np.ndarray                 # POINT_DTYPE
    assignment: np.ndarray             # u16 per point, 0 = unassigned
    planes: tuple[Plane, ...]          # descending inlier_count
    seed: int
    config: SegmenterConfig = field(default=SegmenterConfig())

    def plane_of(self, index: int) -> Optional[Plane]:
        v = int(self.assignment[index])
        return self.planes[v - 1] if v else None


def _orient(normal: np.ndarray, d: float):
    if d < 0 or (d == 0 and normal[np.nonzero(normal)[0][0]] < 0):
        return -normal, -d
    return normal, d


def fit_plane_lsq(pos: np.ndarray):
    """Least-squares plane through points: centroid + smallest eigenvector."""
    centroid = pos.mean(axis=0)
    centered = pos - centroid
    cov = centered.T @ centered
    _, vecs = np.linalg.eigh(cov)
    normal = vecs[:, 0]
    normal = normal / np.linalg.norm(normal)
    d = float(np.dot(normal, centroid))
    normal, d = _orient(normal, d)
    return normal, d


def _residuals(pos: np.ndarray, normal: np.ndarray, d: float) -> np.ndarray:
    return np.abs(pos @ normal - d)


def segment_planes(points: np.ndarray,
                   cfg: SegmenterConfig = SegmenterConfig()
                   ) -> SegmentationResult:
    cfg = cfg.validated()
    n = len(points)
    if n < 3:
        raise TooFewPoints(f"plane segmentation needs >= 3 points, got {n}")
    pos = np.stack([points["x"], points["y"], points["z"]],
                   axis=1).astype(np.float64)
    rng = np.random.default_rng(cfg.seed)
    assignment = np.zeros(n, dtype=np.uint16)
    active = np.arange(n)
    found: list[tuple[Plane, np.ndarray]] = []  # (plane, original indices)

    for plane_round in range(cfg.max_planes):
        if len(active) < max(3, cfg.min_inliers):
            break
        sub = pos[active]
        best_count = -1
        best_model = None
        for _ in range(cfg.iterations_per_plane):
            pick = rng.choice(len(sub), size=3, replace=False)
            a, b, c = sub[pick]
            normal = np.cross(b - a, c - a)
            norm = np.linalg.norm(normal)
            if norm == 0.0:  # collinear sample
                continue
            normal = normal / norm
            d = float(np.dot(normal, a))
            normal, d = _orient(normal, d)
            count = int((_residuals(sub, normal, d) <= cfg.epsilon).sum())
            if count > best_count:  # strict: ties keep the earliest trial
                best_count = count
                best_model = (normal, d)
        if best_model is None or best_count < cfg.min_inliers:
            break
        # refit on the candidate inliers, then re-collect once
        cand_mask = _residuals(sub, *best_model) <= cfg.epsilon
        normal, d = fit_plane_lsq(sub[cand_mask])
        final_mask = _residuals(sub, normal, d) <= cfg.epsilon
        final_idx = active[final_mask]
        if len(final_idx) < cfg.min_inliers:
            # refit walked away from a viable plane; spend the candidate
            # points so the search cannot loop on the same structure
            active = active[~cand_mask]
            continue
        inlier_pos = pos[final_idx]
        rms = float(np.sqrt(np.mean((inlier_pos @ normal - d) ** 2)))
        plane_id = str(uuid.uuid5(
            _PLANE_NS, f"{cfg.seed}:{plane_round}:{len(found)}"))
        plane = Plane(
            id=plane_id,
            normal=tuple(float(c) for c in normal),
            d=float(d),
            inlier_count=int(len(final_idx)),
            aabb=Aabb.of_points(inlier_pos),
            rms_residual=rms,
        )
        found.append((plane, final_idx))
        active = active[~final_mask]

    # descending inlier count; discovery order settles ties
    order = sorted(range(len(found)),
                   key=lambda i: (-found[i][0].inlier_count, i))
    planes = []
    for rank, i in enumerate(order):
        plane, idx = found[i]
        assignment[idx] = rank + 1
        planes.append(plane)
    return SegmentationResult(points=points, assignment=assignment,
                              planes=tuple(planes), seed=cfg.seed, config=cfg)


def anchor_to_plane(vertex: Vertex3, planes, max_dist: float):
    """Snap a vertex onto the nearest plane within max_dist, or None.

    Distance ties go to the smaller plane id in UUID byte order.
    """
    if not max_dist > 0:
        raise ValueError("max_dist must be > 0")
    v = np.asarray(vertex.position, dtype=np.float64)
    best = None
    for plane in planes:
        dist = plane.distance(v)
        if dist > max_dist:
            continue
        key = (dist, uuid.UUID(plane.id).bytes)
        if best is None or key < best[0]:
            best = (key, plane)
    if best is None:
        return None
    plane = best[1]
    n = np.asarray(plane.normal)
    projected = v - (float(np.dot(n, v)) - plane.d) * n
    return plane.id, Vertex3(position=tuple(float(c) for c in projected),
                             snapped=vertex.snapped,
                             snap_node=vertex.snap_node,
                             extras=vertex.extras)
