"""Whitespace-separated XYZ text reader.

Column layouts: ``x y z``, ``x y z i``, ``x y z r g b``, ``x y z i r g b``.
The first data line fixes the layout for the whole file. ``#`` starts a
comment (whole line or trailing); blank lines are skipped.
"""
from __future__ import annotations

from typing import Iterator

import numpy as np

from ..core import CHUNK_POINTS, POINT_DTYPE
from ..errors import CorruptHeader, MalformedRecord

_LAYOUTS = {3: (), 4: ("i",), 6: ("r", "g", "b"), 7: ("i", "r", "g", "b")}


def _split(line: str) -> list[str]:
    hash_at = line.find("#")
    if hash_at >= 0:
        line = line[:hash_at]
    return line.split()


class XyzReader:
    format_name = "XYZ"

    def __init__(self, path: str, chunk_points: int = CHUNK_POINTS):
        self.path = path
        self.chunk_points = chunk_points
        self.columns = self._sniff_columns()
        self.has_color = self.columns in (6, 7)
        self.has_intensity = self.columns in (4, 7)

    def _sniff_columns(self) -> int:
        with open(self.path, "r", encoding="utf-8", errors="replace") as f:
            for lineno, line in enumerate(f, 1):
                parts = _split(line)
                if not parts:
                    continue
                if len(parts) not in _LAYOUTS:
                    raise MalformedRecord(
                        f"{self.path}:{lineno}: {len(parts)} fields "
                        "(expected 3, 4, 6 or 7)")
                return len(parts)
        raise CorruptHeader(f"{self.path}: contains no points")

    def chunks(self) -> Iterator[np.ndarray]:
        cols = self.columns
        extras = _LAYOUTS[cols]
        buf = np.empty(self.chunk_points, dtype=POINT_DTYPE)
        filled = 0
        with open(self.path, "r", encoding="utf-8", errors="replace") as f:
            for lineno, line in enumerate(f, 1):
                parts = _split(line)
                if not parts:
                    continue
                if len(parts) != cols:
                    raise MalformedRecord(
                        f"{self.path}:{lineno}: {len(parts)} fields "
                        f"(layout is {cols} columns)")
                try:
                    vals = [float(v) for v in parts]
                except ValueError:
                    raise MalformedRecord(
                        f"{self.path}:{lineno}: non-numeric field") from None
                if not all(np.isfinite(vals[:3])):
                    raise MalformedRecord(
                        f"{self.path}:{lineno}: non-finite coordinate")
                row = buf[filled]
                row["x"], row["y"], row["z"] = vals[0], vals[1], vals[2]
                rest = vals[3:]
                if "i" in extras:
                    row["intensity"] = min(max(round(rest[0]), 0), 65535)
                    rest = rest[1:]
                else:
                    row["intensity"] = 0
                if "r" in extras:
                    row["r"] = min(max(round(rest[0]), 0), 255)
                    row["g"] = min(max(round(rest[1]), 0), 255)
                    row["b"] = min(max(round(rest[2]), 0), 255)
                else:
                    row["r"] = row["g"] = row["b"] = 128
                row["classification"] = 0
                filled += 1
                if filled == self.chunk_points:
                    yield buf.copy()
                    filled = 0
        if filled:
            yield buf[:filled].copy()
