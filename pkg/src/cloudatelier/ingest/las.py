"""Uncompressed LAS 1.2-1.4 reader, point formats 0-3.

Little-endian throughout. Positions are decoded as raw*scale+offset from
the header. 16-bit colors are down-shifted to 8 bit when a sniff pass over
the first 1000 records sees any channel above 255. Compressed (LAZ) input
is refused with a pointer at the uncompressed workaround.
"""
from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from ..core import CHUNK_POINTS
from ..errors import CorruptHeader, UnsupportedFormat

MAGIC = b"LASF"

# minimal record length per point format
_FORMAT_LENGTH = {0: 20, 1: 28, 2: 26, 3: 34}

_COMMON_FIELDS = [
    ("x", "<i4"), ("y", "<i4"), ("z", "<i4"),
    ("intensity", "<u2"), ("flags", "u1"), ("classification", "u1"),
    ("scan_angle", "i1"), ("user_data", "u1"), ("point_source", "<u2"),
]


def _record_dtype(fmt: int, record_length: int) -> np.dtype:
    fields = list(_COMMON_FIELDS)
    if fmt in (1, 3):
        fields.append(("gps_time", "<f8"))
    if fmt in (2, 3):
        fields += [("red", "<u2"), ("green", "<u2"), ("blue", "<u2")]
    base = np.dtype(fields)
    extra = record_length - base.itemsize
    if extra > 0:
        fields.append(("extra", f"V{extra}"))
    return np.dtype(fields)


@dataclass
class LasHeader:
    version: tuple[int, int]
    point_format: int
    record_length: int
    point_count: int
    offset_to_points: int
    scale: tuple[float, float, float]
    offset: tuple[float, float, float]

    @property
    def has_color(self) -> bool:
        return self.point_format in (2, 3)


def read_header(path: str) -> LasHeader:
    with open(path, "rb") as f:
        raw = f.read(375)
    if len(raw) == 0:
        raise CorruptHeader(f"{path}: empty file")
    if raw[:4] != MAGIC:
        raise CorruptHeader(f"{path}: LAS magic is not 'LASF'")
    if len(raw) < 227:
        raise CorruptHeader(f"{path}: truncated LAS header ({len(raw)} bytes)")

    major, minor = raw[24], raw[25]
    if (major, minor) < (1, 2) or (major, minor) > (1, 4):
        raise UnsupportedFormat(f"{path}: LAS {major}.{minor} not supported (1.2-1.4)")

    header_size, = struct.unpack_from("<H", raw, 94)
    offset_to_points, = struct.unpack_from("<I", raw, 96)
    point_format = raw[104]
    record_length, = struct.unpack_from("<H", raw, 105)
    legacy_count, = struct.unpack_from("<I", raw, 107)
    scale = struct.unpack_from("<3d", raw, 131)
    offset = struct.unpack_from("<3d", raw, 155)

    if point_format & 0x80:
        raise UnsupportedFormat(
            f"{path}: LAZ-compressed point data; decompress to uncompressed "
            "LAS 1.2-1.4 (e.g. `laszip -i in.laz -o out.las`) and retry")
    if point_format not in _FORMAT_LENGTH:
        raise UnsupportedFormat(
            f"{path}: LAS point format {point_format} not supported (0-3)")

    count = legacy_count
    if count == 0 and (major, minor) >= (1, 4) and len(raw) >= 255:
        count, = struct.unpack_from("<Q", raw, 247)

    if record_length < _FORMAT_LENGTH[point_format]:
        raise CorruptHeader(
            f"{path}: record length {record_length} below minimum "
            f"{_FORMAT_LENGTH[point_format]} for format {point_format}")
    if offset_to_points < header_size:
        raise CorruptHeader(f"{path}: point data offset inside header")
    if count == 0:
        raise CorruptHeader(f"{path}: contains no points")

    size = os.path.getsize(path)
    if offset_to_points + count * record_length > size:
        raise CorruptHeader(
            f"{path}: header claims {count} x {record_length}-byte records at "
            f"offset {offset_to_points}, beyond file size {size}")

    return LasHeader((major, minor), point_format, record_length, count,
                     offset_to_points, tuple(scale), tuple(offset))


class LasReader:
    """Chunked reader over one LAS file; reusable for repeated scans."""

    format_name = "LAS"

    def __init__(self, path: str, chunk_points: int = CHUNK_POINTS):
        self.path = path
        self.chunk_points = chunk_points
        self.header = read_header(path)
        self._dtype = _record_dtype(self.header.point_format,
                                    self.header.record_length)
        self.has_color = self.header.has_color
        self.has_intensity = True
        # 16-bit color heuristic: one sniff pass, applied to every scan
        self._color_shift = self.has_color and self._sniff_wide_color()

    def _raw_chunks(self) -> Iterator[np.ndarray]:
        h = self.header
        remaining = h.point_count
        with open(self.path, "rb") as f:
            f.seek(h.offset_to_points)
            while remaining > 0:
                n = min(remaining, self.chunk_points)
                buf = f.read(n * h.record_length)
                if len(buf) != n * h.record_length:
                    raise CorruptHeader(
                        f"{self.path}: point data ends early "
                        f"({remaining} records missing)")
                yield np.frombuffer(buf, dtype=self._dtype)
                remaining -= n

    def _sniff_wide_color(self) -> bool:
        seen = 0
        for raw in self._raw_chunks():
            part = raw[:1000 - seen]
            for f in ("red", "green", "blue"):
                if part[f].max(initial=0) > 255:
                    return True
            seen += len(part)
            if seen >= 1000:
                break
        return False

    def chunks(self) -> Iterator[np.ndarray]:
        from ..core import POINT_DTYPE
        h = self.header
        sx, sy, sz = h.scale
        ox, oy, oz = h.offset
        for raw in self._raw_chunks():
            out = np.empty(len(raw), dtype=POINT_DTYPE)
            out["x"] = raw["x"].astype(np.float64) * sx + ox
            out["y"] = raw["y"].astype(np.float64) * sy + oy
            out["z"] = raw["z"].astype(np.float64) * sz + oz
            if self.has_color:
                shift = 8 if self._color_shift else 0
                for dst, src in (("r", "red"), ("g", "green"), ("b", "blue")):
                    out[dst] = np.minimum(raw[src] >> shift, 255).astype(np.uint8)
            else:
                out["r"] = out["g"] = out["b"] = 128
            out["intensity"] = raw["intensity"]
            out["classification"] = raw["classification"]
            yield out
