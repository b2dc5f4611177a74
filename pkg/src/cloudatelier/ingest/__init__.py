"""Parse LAS / PLY / XYZ survey files into a uniform chunked point stream.

`open_source` sniffs the format (magic bytes first, extension as fallback),
does one full scan to build a `SourceSummary` with a tight bounding box,
and returns a `PointSource` whose ``chunks()`` / ``records()`` re-scan the
file on every call. Streams are single-consumer; open several sources for
concurrent reads.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Iterator, Protocol

import numpy as np

from ..core import (
    CHUNK_POINTS, POINT_DTYPE, Aabb, AabbAccumulator, PointRecord,
    SourceSummary, iter_records,
)
from ..errors import (
    CorruptHeader, DegenerateExtent, MalformedRecord, UnsupportedFormat,
)
from .las import LasReader
from .ply import PlyReader
from .xyz import XyzReader

__all__ = [
    "Aabb", "PointRecord", "PointSource", "SourceSummary",
    "cubify", "open_source",
]

_XYZ_EXTENSIONS = {".xyz", ".txt", ".pts", ".asc"}


class _Reader(Protocol):
    format_name: str
    has_color: bool
    has_intensity: bool

    def chunks(self) -> Iterator[np.ndarray]: ...


@dataclass
class PointSource:
    """One opened survey file: a summary plus repeatable scans."""

    path: str
    summary: SourceSummary
    _reader: _Reader

    def chunks(self) -> Iterator[np.ndarray]:
        """Fresh scan, yielding POINT_DTYPE arrays in file order."""
        return self._reader.chunks()

    def records(self) -> Iterator[PointRecord]:
        return iter_records(self.chunks())


def _sniff_reader(path: str, chunk_points: int) -> _Reader:
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    with open(path, "rb") as f:
        head = f.read(4)
    if len(head) == 0:
        raise CorruptHeader(f"{path}: empty file")
    ext = os.path.splitext(path)[1].lower()
    if head == b"LASF":
        return LasReader(path, chunk_points)
    if head[:3] == b"ply":
        return PlyReader(path, chunk_points)
    if ext == ".laz":
        raise UnsupportedFormat(
            f"{path}: LAZ is not supported; decompress to uncompressed "
            "LAS 1.2-1.4 (e.g. `laszip -i in.laz -o out.las`) and retry")
    if ext in (".las",):
        raise CorruptHeader(f"{path}: LAS magic is not 'LASF'")
    if ext == ".ply":
        raise CorruptHeader(f"{path}: not a PLY file")
    if ext in _XYZ_EXTENSIONS or _looks_like_xyz(head, path):
        return XyzReader(path, chunk_points)
    raise UnsupportedFormat(f"{path}: unrecognized format")


def _looks_like_xyz(head: bytes, path: str) -> bool:
    try:
        with open(path, "r", encoding="utf-8") as f:
            for line in f:
                stripped = line.split("#")[0].split()
                if not stripped:
                    continue
                if len(stripped) < 3:
                    return False
                float(stripped[0]), float(stripped[1]), float(stripped[2])
                return True
    except (ValueError, UnicodeDecodeError):
        return False
    return False


def open_source(path: str, chunk_points: int = CHUNK_POINTS) -> PointSource:
    """Open a LAS/PLY/XYZ file and scan it once for the summary."""
    reader = _sniff_reader(path, chunk_points)
    acc = AabbAccumulator()
    for chunk in reader.chunks():
        for axis in ("x", "y", "z"):
            if not np.isfinite(chunk[axis]).all():
                raise MalformedRecord(f"{path}: non-finite {axis} coordinate")
        acc.add(chunk)
    if acc.count == 0:
        raise CorruptHeader(f"{path}: contains no points")
    summary = SourceSummary(
        point_count=acc.count,
        aabb=acc.result(),
        has_color=reader.has_color,
        has_intensity=reader.has_intensity,
        source_format=reader.format_name,
    )
    return PointSource(path=path, summary=summary, _reader=reader)


def cubify(aabb: Aabb, point_count: int | None = None) -> Aabb:
    """Grow a box into a cube sharing its min corner.

    Edge length is the largest extent; a zero-extent box falls back to a
    1 m cube so a single point still gets a usable root. A caller that
    claims more than one point over a zero-extent box gets
    `DegenerateExtent` instead of the silent fallback.
    """
    extent = aabb.extent
    edge = max(extent)
    if edge == 0.0:
        if point_count is not None and point_count > 1:
            raise DegenerateExtent(
                f"{point_count} points claimed inside a zero-extent box")
        edge = 1.0
    if not math.isfinite(edge):
        raise DegenerateExtent(f"non-finite extent {extent}")
    return Aabb(aabb.min, tuple(lo + edge for lo in aabb.min))
