"""Shared vocabulary: the uniform point record, axis-aligned boxes and
the chunked point-stream convention used by every stage of the pipeline.

Bulk paths never materialize one Python object per point. A *point stream*
is any iterable of numpy structured arrays with dtype :data:`POINT_DTYPE`;
`PointRecord` exists for the record-at-a-time surfaces (tests, snapping,
small fixtures).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

# Decoded survey point: position in meters (source scale+offset applied),
# 8-bit color, 16-bit intensity, raw classification byte. Packed, little-endian.
POINT_DTYPE = np.dtype([
    ("x", "<f8"), ("y", "<f8"), ("z", "<f8"),
    ("r", "u1"), ("g", "u1"), ("b", "u1"),
    ("intensity", "<u2"),
    ("classification", "u1"),
])

DEFAULT_COLOR = (128, 128, 128)

# How many points a parser hands over per chunk by default.
CHUNK_POINTS = 262_144


@dataclass(frozen=True)
class PointRecord:
    x: float
    y: float
    z: float
    r: int = DEFAULT_COLOR[0]
    g: int = DEFAULT_COLOR[1]
    b: int = DEFAULT_COLOR[2]
    intensity: int = 0
    classification: int = 0

    @property
    def position(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


def records_to_array(records: Sequence[PointRecord]) -> np.ndarray:
    out = np.empty(len(records), dtype=POINT_DTYPE)
    for i, p in enumerate(records):
        out[i] = (p.x, p.y, p.z, p.r, p.g, p.b, p.intensity, p.classification)
    return out


def array_to_records(arr: np.ndarray) -> list[PointRecord]:
    return [
        PointRecord(float(row["x"]), float(row["y"]), float(row["z"]),
                    int(row["r"]), int(row["g"]), int(row["b"]),
                    int(row["intensity"]), int(row["classification"]))
        for row in arr
    ]


def iter_records(chunks: Iterable[np.ndarray]) -> Iterator[PointRecord]:
    for chunk in chunks:
        yield from array_to_records(chunk)


def positions(chunk: np.ndarray) -> np.ndarray:
    """(n, 3) float64 view-copy of a point chunk's coordinates."""
    out = np.empty((len(chunk), 3), dtype=np.float64)
    out[:, 0] = chunk["x"]
    out[:, 1] = chunk["y"]
    out[:, 2] = chunk["z"]
    return out


@dataclass(frozen=True)
class Aabb:
    """Axis-aligned box, min/max corners in meters. min <= max per axis."""

    min: tuple[float, float, float]
    max: tuple[float, float, float]

    def __post_init__(self):
        if any(lo > hi for lo, hi in zip(self.min, self.max)):
            raise ValueError(f"inverted Aabb: {self.min} > {self.max}")

    @property
    def extent(self) -> tuple[float, float, float]:
        return tuple(hi - lo for lo, hi in zip(self.min, self.max))

    @property
    def diagonal(self) -> float:
        return math.sqrt(sum(e * e for e in self.extent))

    @property
    def center(self) -> tuple[float, float, float]:
        return tuple((lo + hi) / 2.0 for lo, hi in zip(self.min, self.max))

    def contains(self, p: Sequence[float], slack: float = 0.0) -> bool:
        return all(lo - slack <= v <= hi + slack
                   for v, lo, hi in zip(p, self.min, self.max))

    def distance_to(self, p: Sequence[float]) -> float:
        """Euclidean distance from a point to the box (0 inside)."""
        d2 = 0.0
        for v, lo, hi in zip(p, self.min, self.max):
            if v < lo:
                d2 += (lo - v) ** 2
            elif v > hi:
                d2 += (v - hi) ** 2
        return math.sqrt(d2)

    def to_json(self) -> dict:
        return {"min": list(self.min), "max": list(self.max)}

    @classmethod
    def from_json(cls, obj: dict) -> "Aabb":
        return cls(tuple(float(v) for v in obj["min"]),
                   tuple(float(v) for v in obj["max"]))

    @classmethod
    def of_points(cls, xyz: np.ndarray) -> "Aabb":
        lo = xyz.min(axis=0)
        hi = xyz.max(axis=0)
        return cls(tuple(float(v) for v in lo), tuple(float(v) for v in hi))


@dataclass
class AabbAccumulator:
    """Streaming bounding-box builder for chunked scans."""

    lo: np.ndarray = field(default_factory=lambda: np.full(3, np.inf))
    hi: np.ndarray = field(default_factory=lambda: np.full(3, -np.inf))
    count: int = 0

    def add(self, chunk: np.ndarray) -> None:
        if len(chunk) == 0:
            return
        for i, f in enumerate(("x", "y", "z")):
            self.lo[i] = min(self.lo[i], float(chunk[f].min()))
            self.hi[i] = max(self.hi[i], float(chunk[f].max()))
        self.count += len(chunk)

    def result(self) -> Aabb:
        if self.count == 0:
            raise ValueError("no points accumulated")
        return Aabb(tuple(self.lo.tolist()), tuple(self.hi.tolist()))


@dataclass(frozen=True)
class SourceSummary:
    """Full-scan facts about one input file."""

    point_count: int
    aabb: Aabb
    has_color: bool
    has_intensity: bool
    source_format: str  # "LAS" | "PLY" | "XYZ"
