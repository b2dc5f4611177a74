"""Pure measurement computations over series vertices."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateGeometry
from .model import MeasurementSeries, SeriesKind


@dataclass(frozen=True)
class MeasurementResult:
    kind: SeriesKind
    values: tuple[float, ...]
    segments: tuple[float, ...] = ()

    @property
    def value(self) -> float:
        return self.values[0]


def _positions(series: MeasurementSeries) -> np.ndarray:
    return np.array([v.position for v in series.vertices], dtype=np.float64)


def polyline_length(points: np.ndarray) -> tuple[float, tuple[float, ...]]:
    deltas = np.diff(points, axis=0)
    seg = np.linalg.norm(deltas, axis=1)
    return float(seg.sum()), tuple(float(s) for s in seg)


def triangle_angles(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> tuple[float, float, float]:
    """Interior angles at A, B, C in degrees."""
    if (np.array_equal(a, b) or np.array_equal(b, c)
            or np.array_equal(a, c)):
        raise DegenerateGeometry("Angle vertices must be distinct")
    sides = {"ab": b - a, "bc": c - b, "ca": a - c}
    lengths = {k: np.linalg.norm(v) for k, v in sides.items()}

    def angle(u, v, lu, lv):
        cosine = np.dot(u, v) / (lu * lv)
        return float(np.degrees(np.arccos(np.clip(cosine, -1.0, 1.0))))

    at_a = angle(sides["ab"], -sides["ca"], lengths["ab"], lengths["ca"])
    at_b = angle(-sides["ab"], sides["bc"], lengths["ab"], lengths["bc"])
    at_c = angle(-sides["bc"], sides["ca"], lengths["bc"], lengths["ca"])
    return at_a, at_b, at_c


def newell_area(points: np.ndarray) -> float:
    """Half the magnitude of the cyclic cross-product sum.

    Exact planar polygon area; a documented convention for skew polygons.
    """
    rolled = np.roll(points, -1, axis=0)
    total = np.cross(points, rolled).sum(axis=0)
    return float(np.linalg.norm(total) / 2.0)


def evaluate(series: MeasurementSeries) -> MeasurementResult:
    series.validate()
    kind = series.kind
    pts = _positions(series)

    if kind is SeriesKind.DISTANCE:
        total, segs = polyline_length(pts)
        return MeasurementResult(kind, (total,), segs)

    if kind is SeriesKind.HEIGHT:
        return MeasurementResult(kind, (abs(float(pts[1, 2] - pts[0, 2])),))

    if kind is SeriesKind.ANGLE:
        return MeasurementResult(kind, triangle_angles(pts[0], pts[1], pts[2]))

    if kind is SeriesKind.AREA:
        return MeasurementResult(kind, (newell_area(pts),))

    if kind is SeriesKind.VOLUME:
        ex, ey, ez = series.box_extent
        if ex <= 0 or ey <= 0 or ez <= 0:
            raise DegenerateGeometry("Volume box extent must be positive")
        # yaw rotates the box, it cannot change the volume
        return MeasurementResult(kind, (float(ex) * float(ey) * float(ez),))

    # profile extraction needs the index (see extract_profile);
    # polygons and annotations carry no scalar
    return MeasurementResult(kind, ())
