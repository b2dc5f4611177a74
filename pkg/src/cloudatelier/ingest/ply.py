"""PLY reader: ascii and binary_little_endian, element `vertex` with
x,y,z (float/double) plus optional red/green/blue (uchar or ushort) and
an optional scalar intensity property. Other elements are skipped.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import BinaryIO, Iterator

import numpy as np

from ..core import CHUNK_POINTS, POINT_DTYPE
from ..errors import CorruptHeader, MalformedRecord, UnsupportedFormat

_TYPES = {
    "char": "i1", "int8": "i1",
    "uchar": "u1", "uint8": "u1",
    "short": "<i2", "int16": "<i2",
    "ushort": "<u2", "uint16": "<u2",
    "int": "<i4", "int32": "<i4",
    "uint": "<u4", "uint32": "<u4",
    "float": "<f4", "float32": "<f4",
    "double": "<f8", "float64": "<f8",
}


@dataclass
class _Property:
    name: str
    dtype: str               # numpy dtype string for scalar props
    list_count_dtype: str | None = None  # set for list properties


@dataclass
class _Element:
    name: str
    count: int
    properties: list[_Property] = field(default_factory=list)

    @property
    def has_list(self) -> bool:
        return any(p.list_count_dtype for p in self.properties)

    def row_dtype(self) -> np.dtype:
        return np.dtype([(p.name, p.dtype) for p in self.properties])


@dataclass
class _PlyHeader:
    binary: bool
    elements: list[_Element]
    data_offset: int


def _parse_header(path: str) -> _PlyHeader:
    with open(path, "rb") as f:
        first = f.readline()
        if first.strip() not in (b"ply",):
            raise CorruptHeader(f"{path}: not a PLY file")
        binary = None
        elements: list[_Element] = []
        while True:
            line = f.readline()
            if not line:
                raise CorruptHeader(f"{path}: missing end_header")
            parts = line.decode("ascii", "replace").split()
            if not parts:
                continue
            kw = parts[0]
            if kw == "comment" or kw == "obj_info":
                continue
            if kw == "format":
                if parts[1] == "ascii":
                    binary = False
                elif parts[1] == "binary_little_endian":
                    binary = True
                elif parts[1] == "binary_big_endian":
                    raise UnsupportedFormat(f"{path}: big-endian PLY not supported")
                else:
                    raise CorruptHeader(f"{path}: unknown PLY format {parts[1]!r}")
            elif kw == "element":
                if len(parts) != 3:
                    raise CorruptHeader(f"{path}: malformed element line {line!r}")
                elements.append(_Element(parts[1], int(parts[2])))
            elif kw == "property":
                if not elements:
                    raise CorruptHeader(f"{path}: property before any element")
                if parts[1] == "list":
                    if len(parts) != 5 or parts[2] not in _TYPES or parts[3] not in _TYPES:
                        raise CorruptHeader(f"{path}: malformed list property {line!r}")
                    elements[-1].properties.append(
                        _Property(parts[4], _TYPES[parts[3]], _TYPES[parts[2]]))
                else:
                    if len(parts) != 3 or parts[1] not in _TYPES:
                        raise CorruptHeader(f"{path}: unknown property type {line!r}")
                    elements[-1].properties.append(_Property(parts[2], _TYPES[parts[1]]))
            elif kw == "end_header":
                break
            else:
                raise CorruptHeader(f"{path}: unexpected header line {line!r}")
        if binary is None:
            raise CorruptHeader(f"{path}: PLY header missing format line")
        return _PlyHeader(binary, elements, f.tell())


class PlyReader:
    format_name = "PLY"

    def __init__(self, path: str, chunk_points: int = CHUNK_POINTS):
        self.path = path
        self.chunk_points = chunk_points
        self.header = _parse_header(path)

        vertex = next((e for e in self.header.elements if e.name == "vertex"), None)
        if vertex is None:
            raise CorruptHeader(f"{path}: no vertex element")
        if vertex.count == 0:
            raise CorruptHeader(f"{path}: contains no points")
        if vertex.has_list:
            raise UnsupportedFormat(f"{path}: list properties on vertex element")
        names = {p.name for p in vertex.properties}
        if not {"x", "y", "z"} <= names:
            raise CorruptHeader(f"{path}: vertex element lacks x/y/z")
        self._vertex = vertex

        color_props = [p for p in vertex.properties if p.name in ("red", "green", "blue")]
        self.has_color = len(color_props) == 3
        if color_props and not self.has_color:
            raise CorruptHeader(f"{path}: partial red/green/blue properties")
        if self.has_color and any(p.dtype not in ("u1", "<u2") for p in color_props):
            self.has_color = False  # unsupported color width: ignore color
        self._color_wide = self.has_color and color_props[0].dtype == "<u2"
        self.has_intensity = "intensity" in names
        self._color_shift = False
        if self._color_wide:
            self._color_shift = self._sniff_wide_color()

    # --- element data traversal ------------------------------------------

    def _skip_element_binary(self, f: BinaryIO, elem: _Element) -> None:
        if not elem.has_list:
            f.seek(elem.count * elem.row_dtype().itemsize, 1)
            return
        for _ in range(elem.count):
            for p in elem.properties:
                if p.list_count_dtype:
                    n_raw = f.read(np.dtype(p.list_count_dtype).itemsize)
                    if len(n_raw) < np.dtype(p.list_count_dtype).itemsize:
                        raise CorruptHeader(f"{self.path}: truncated list element")
                    n = int(np.frombuffer(n_raw, dtype=p.list_count_dtype)[0])
                    f.seek(n * np.dtype(p.dtype).itemsize, 1)
                else:
                    f.seek(np.dtype(p.dtype).itemsize, 1)

    def _vertex_chunks_binary(self, f: BinaryIO) -> Iterator[np.ndarray]:
        dtype = self._vertex.row_dtype()
        remaining = self._vertex.count
        while remaining > 0:
            n = min(remaining, self.chunk_points)
            buf = f.read(n * dtype.itemsize)
            if len(buf) != n * dtype.itemsize:
                raise CorruptHeader(f"{self.path}: vertex data ends early")
            yield np.frombuffer(buf, dtype=dtype)
            remaining -= n

    def _vertex_chunks_ascii(self, f: BinaryIO) -> Iterator[np.ndarray]:
        # ascii data: one element row per line, elements in declaration order
        dtype = self._vertex.row_dtype()
        n_props = len(self._vertex.properties)
        for elem in self.header.elements:
            if elem.name == "vertex":
                rows = np.empty(self.chunk_points, dtype=dtype)
                filled = 0
                for _ in range(elem.count):
                    line = f.readline()
                    if not line:
                        raise CorruptHeader(f"{self.path}: vertex data ends early")
                    parts = line.split()
                    if len(parts) < n_props:
                        raise MalformedRecord(
                            f"{self.path}: vertex row has {len(parts)} of "
                            f"{n_props} values")
                    try:
                        rows[filled] = tuple(float(v) for v in parts[:n_props])
                    except ValueError as exc:
                        raise MalformedRecord(f"{self.path}: {exc}") from exc
                    filled += 1
                    if filled == self.chunk_points:
                        yield rows
                        rows = np.empty(self.chunk_points, dtype=dtype)
                        filled = 0
                if filled:
                    yield rows[:filled]
                return
            else:
                for _ in range(elem.count):
                    if not f.readline():
                        raise CorruptHeader(f"{self.path}: element data ends early")

    def _raw_chunks(self) -> Iterator[np.ndarray]:
        with open(self.path, "rb") as f:
            f.seek(self.header.data_offset)
            if self.header.binary:
                for elem in self.header.elements:
                    if elem.name == "vertex":
                        yield from self._vertex_chunks_binary(f)
                        return
                    self._skip_element_binary(f, elem)
            else:
                yield from self._vertex_chunks_ascii(f)

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
        for raw in self._raw_chunks():
            out = np.empty(len(raw), dtype=POINT_DTYPE)
            for axis in ("x", "y", "z"):
                vals = raw[axis].astype(np.float64)
                if not np.isfinite(vals).all():
                    raise MalformedRecord(f"{self.path}: non-finite {axis} coordinate")
                out[axis] = vals
            if self.has_color:
                shift = 8 if self._color_shift else 0
                for dst, src in (("r", "red"), ("g", "green"), ("b", "blue")):
                    vals = raw[src].astype(np.uint32) >> shift
                    out[dst] = np.minimum(vals, 255).astype(np.uint8)
            else:
                out["r"] = out["g"] = out["b"] = 128
            if self.has_intensity:
                vals = np.nan_to_num(raw["intensity"].astype(np.float64))
                out["intensity"] = np.clip(np.rint(vals), 0, 65535).astype(np.uint16)
            else:
                out["intensity"] = 0
            out["classification"] = 0
            yield out
