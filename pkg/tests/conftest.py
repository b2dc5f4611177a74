import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cloudatelier.core import POINT_DTYPE  # noqa: E402


def make_cloud(xyz, rgb=None, intensity=None, classification=None):
    """Structured point array from an (n, 3) coordinate array."""
    xyz = np.asarray(xyz, dtype=np.float64).reshape(-1, 3)
    out = np.zeros(len(xyz), dtype=POINT_DTYPE)
    out["x"], out["y"], out["z"] = xyz[:, 0], xyz[:, 1], xyz[:, 2]
    if rgb is None:
        out["r"] = out["g"] = out["b"] = 128
    else:
        rgb = np.asarray(rgb).reshape(-1, 3)
        out["r"], out["g"], out["b"] = rgb[:, 0], rgb[:, 1], rgb[:, 2]
    if intensity is not None:
        out["intensity"] = intensity
    if classification is not None:
        out["classification"] = classification
    return out


class ArraySource:
    """Feed an in-memory cloud through the builder like a file source."""

    def __init__(self, points: np.ndarray, chunk_points: int = 100_000):
        from cloudatelier.core import AabbAccumulator, SourceSummary
        acc = AabbAccumulator()
        acc.add(points)
        self.points = points
        self.chunk_points = chunk_points
        self.summary = SourceSummary(
            point_count=len(points),
            aabb=acc.result(),
            has_color=True,
            has_intensity=True,
            source_format="memory",
        )

    def chunks(self):
        for start in range(0, len(self.points), self.chunk_points):
            yield self.points[start:start + self.chunk_points]


def uniform_cloud(n, seed=0, lo=0.0, hi=10.0):
    rng = np.random.default_rng(seed)
    return make_cloud(rng.uniform(lo, hi, size=(n, 3)))


def gaussian_clusters(n, seed=0, clusters=5, sigma=0.3, span=50.0):
    rng = np.random.default_rng(seed)
    centers = rng.uniform(0, span, size=(clusters, 3))
    which = rng.integers(0, clusters, size=n)
    return make_cloud(centers[which] + rng.normal(0, sigma, size=(n, 3)))


def duplicate_pairs(n, seed=0, lo=0.0, hi=10.0):
    """Cloud of n points where every location appears exactly twice."""
    assert n % 2 == 0
    rng = np.random.default_rng(seed)
    base = rng.uniform(lo, hi, size=(n // 2, 3))
    return make_cloud(np.repeat(base, 2, axis=0))


def multiset_match(a, b, tol):
    """True when (n,3) arrays a and b pair up one-to-one within `tol` per axis.

    Bucketed greedy matching: sound for tolerances far below typical point
    spacing (exact duplicates pair trivially since they share a bucket).
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        return False
    if len(a) == 0:
        return True
    cell = max(tol * 4.0, 1e-300)
    buckets = {}
    for j, key in enumerate(map(tuple, np.floor(b / cell).astype(np.int64))):
        buckets.setdefault(key, []).append(j)
    used = np.zeros(len(b), dtype=bool)
    keys_a = np.floor(a / cell).astype(np.int64)
    for i in range(len(a)):
        kx, ky, kz = keys_a[i]
        hit = -1
        for dx in (0, -1, 1):
            for dy in (0, -1, 1):
                for dz in (0, -1, 1):
                    for j in buckets.get((kx + dx, ky + dy, kz + dz), ()):
                        if not used[j] and np.abs(a[i] - b[j]).max() <= tol:
                            hit = j
                            break
                    if hit >= 0:
                        break
                if hit >= 0:
                    break
            if hit >= 0:
                break
        if hit < 0:
            return False
        used[hit] = True
    return True


def plane_cloud(n, normal, d, jitter, extent=5.0, seed=0):
    """Points on the plane n·p = d, jittered along the normal."""
    rng = np.random.default_rng(seed)
    normal = np.asarray(normal, dtype=np.float64)
    normal = normal / np.linalg.norm(normal)
    # basis of the plane
    helper = np.array([1.0, 0.0, 0.0])
    if abs(normal[0]) > 0.9:
        helper = np.array([0.0, 1.0, 0.0])
    u = np.cross(normal, helper)
    u /= np.linalg.norm(u)
    v = np.cross(normal, u)
    coords = rng.uniform(-extent, extent, size=(n, 2))
    noise = rng.uniform(-jitter, jitter, size=n)
    pts = (d + noise)[:, None] * normal + coords[:, :1] * u + coords[:, 1:] * v
    return make_cloud(pts)


def cube_shell(per_face=200, jitter=0.0005, seed=0):
    """Unit cube surface, per_face samples on each of the 6 faces."""
    rng = np.random.default_rng(seed)
    faces = []
    for axis in range(3):
        for side in (0.0, 1.0):
            uv = rng.uniform(0.0, 1.0, size=(per_face, 2))
            w = side + rng.uniform(-jitter, jitter, size=per_face)
            pts = np.empty((per_face, 3))
            others = [a for a in range(3) if a != axis]
            pts[:, axis] = w
            pts[:, others[0]] = uv[:, 0]
            pts[:, others[1]] = uv[:, 1]
            faces.append(pts)
    return make_cloud(np.concatenate(faces))


def ball_cloud(n, seed=0, radius=1.0):
    rng = np.random.default_rng(seed)
    pts = []
    while len(pts) < n:
        cand = rng.uniform(-radius, radius, size=(n * 2, 3))
        keep = cand[np.linalg.norm(cand, axis=1) <= radius]
        pts.extend(keep.tolist())
    return make_cloud(np.array(pts[:n]))


def random_document(seed):
    """Deterministic randomized layer document covering every series kind."""
    import uuid as _uuid

    from cloudatelier.measure import (
        LayerDocument,
        MeasurementSeries,
        SeriesKind,
        Vertex3,
    )

    rng = np.random.default_rng(seed)
    labels = ["", "façade", "crête nord", "pile #4", "зона", "span"]
    authors = ["ana", "rémi", "surveyor-2", ""]

    def rid():
        return str(_uuid.UUID(bytes=rng.bytes(16), version=4))

    def extras(level):
        out = {}
        if rng.random() < 0.4:
            out["crs"] = "EPSG:2154"
        if rng.random() < 0.3:
            out["tags"] = [int(v) for v in rng.integers(0, 9, size=3)]
        if rng.random() < 0.2 and level == "series":
            out["meta"] = {"nested": {"score": float(rng.normal())}}
        return out

    def vertex():
        snapped = bool(rng.random() < 0.3)
        node = "r" + "".join(str(d) for d in rng.integers(0, 8, size=3)) \
            if snapped else None
        return Vertex3(
            position=tuple(float(c) for c in rng.normal(scale=50, size=3)),
            snapped=snapped, snap_node=node, extras=extras("vertex"))

    def series(kind):
        counts = {
            SeriesKind.DISTANCE: int(rng.integers(2, 6)),
            SeriesKind.HEIGHT: 2,
            SeriesKind.ANGLE: 3,
            SeriesKind.AREA: int(rng.integers(3, 7)),
            SeriesKind.VOLUME: 1,
            SeriesKind.PROFILE: int(rng.integers(2, 5)),
            SeriesKind.POLYGON: int(rng.integers(3, 6)),
            SeriesKind.ANNOTATION: 1,
        }
        kwargs = {}
        if kind is SeriesKind.PROFILE:
            kwargs["profile_width"] = float(rng.uniform(0.1, 5.0))
        if kind is SeriesKind.VOLUME:
            kwargs["box_extent"] = tuple(float(e)
                                         for e in rng.uniform(0.1, 9, size=3))
            kwargs["yaw"] = float(rng.uniform(-3.14, 3.14))
        return MeasurementSeries(
            id=rid(), kind=kind,
            vertices=tuple(vertex() for _ in range(counts[kind])),
            label=str(rng.choice(labels)),
            color=tuple(int(c) for c in rng.integers(0, 256, size=3)),
            version=int(rng.integers(0, 1000)),
            author=str(rng.choice(authors)),
            extras=extras("series"), **kwargs)

    kinds = list(SeriesKind)
    picked = [kinds[int(i)] for i in rng.integers(0, len(kinds),
                                                  size=rng.integers(0, 7))]
    doc = LayerDocument(
        id=rid(), name=str(rng.choice(labels)),
        base_version=int(rng.integers(0, 50)),
        series=tuple(series(k) for k in picked),
        plane_refs=tuple(rid() for _ in range(int(rng.integers(0, 3)))),
        extras=extras("layer"))
    doc.validate()
    return doc


@pytest.fixture
def tmp_out(tmp_path):
    return tmp_path / "out"
