"""One-way DXF export (R12 ASCII).

Linear kinds become 3D POLYLINEs (closed where the shape is a loop), areas
additionally get a 3DFACE fan, labels and annotations become TEXT. Each
series kind goes on its own layer.
"""
from __future__ import annotations

import math

from .model import LayerDocument, MeasurementSeries, SeriesKind

# AutoCAD color index per kind layer
_ACI = {
    SeriesKind.DISTANCE: 1,
    SeriesKind.HEIGHT: 2,
    SeriesKind.ANGLE: 3,
    SeriesKind.AREA: 4,
    SeriesKind.VOLUME: 5,
    SeriesKind.PROFILE: 6,
    SeriesKind.POLYGON: 7,
    SeriesKind.ANNOTATION: 8,
}
_CLOSED_KINDS = {SeriesKind.ANGLE, SeriesKind.AREA, SeriesKind.POLYGON}
_TEXT_HEIGHT = 0.25


def _num(value: float) -> str:
    return format(float(value), ".12g")


class _Tags:
    def __init__(self):
        self.rows: list[str] = []

    def add(self, code: int, value) -> None:
        self.rows.append(str(code))
        self.rows.append(_num(value) if isinstance(value, float) else str(value))

    def point(self, base: int, xyz) -> None:
        self.add(base, float(xyz[0]))
        self.add(base + 10, float(xyz[1]))
        self.add(base + 20, float(xyz[2]))

    def text(self) -> str:
        return "\n".join(self.rows) + "\n"


def _layer_name(kind: SeriesKind) -> str:
    return kind.value.upper()


def _polyline(t: _Tags, layer: str, points, closed: bool) -> None:
    t.add(0, "POLYLINE")
    t.add(8, layer)
    t.add(66, 1)
    t.add(70, 8 | (1 if closed else 0))  # 8 = 3D polyline
    t.point(10, (0.0, 0.0, 0.0))
    for p in points:
        t.add(0, "VERTEX")
        t.add(8, layer)
        t.point(10, p)
        t.add(70, 32)  # 3D polyline vertex
    t.add(0, "SEQEND")
    t.add(8, layer)


def _text(t: _Tags, layer: str, position, content: str) -> None:
    t.add(0, "TEXT")
    t.add(8, layer)
    t.point(10, position)
    t.add(40, _TEXT_HEIGHT)
    t.add(1, content)


def _face(t: _Tags, layer: str, a, b, c) -> None:
    t.add(0, "3DFACE")
    t.add(8, layer)
    t.point(10, a)
    t.point(11, b)
    t.point(12, c)
    t.point(13, c)  # repeated corner = triangle


def _volume_rings(series: MeasurementSeries):
    cx, cy, cz = series.vertices[0].position
    hx, hy, hz = (e / 2.0 for e in series.box_extent)
    cos_y = math.cos(series.yaw)
    sin_y = math.sin(series.yaw)
    corners = [(-hx, -hy), (hx, -hy), (hx, hy), (-hx, hy)]
    ring = [(cx + dx * cos_y - dy * sin_y, cy + dx * sin_y + dy * cos_y)
            for dx, dy in corners]
    bottom = [(x, y, cz - hz) for x, y in ring]
    top = [(x, y, cz + hz) for x, y in ring]
    return bottom, top


def _emit_series(t: _Tags, s: MeasurementSeries) -> None:
    layer = _layer_name(s.kind)
    pts = [v.position for v in s.vertices]
    if s.kind is SeriesKind.ANNOTATION:
        _text(t, layer, pts[0], s.label)
        return
    if s.kind is SeriesKind.VOLUME:
        bottom, top = _volume_rings(s)
        _polyline(t, layer, bottom, closed=True)
        _polyline(t, layer, top, closed=True)
    else:
        _polyline(t, layer, pts, closed=s.kind in _CLOSED_KINDS)
    if s.kind is SeriesKind.AREA:
        for i in range(1, len(pts) - 1):
            _face(t, layer, pts[0], pts[i], pts[i + 1])
    if s.label:
        _text(t, layer, pts[0], s.label)


def export_layer_dxf(doc: LayerDocument) -> bytes:
    doc.validate()
    kinds = []
    for s in doc.series:
        if s.kind not in kinds:
            kinds.append(s.kind)

    t = _Tags()
    t.add(0, "SECTION")
    t.add(2, "HEADER")
    t.add(9, "$ACADVER")
    t.add(1, "AC1009")
    t.add(0, "ENDSEC")

    t.add(0, "SECTION")
    t.add(2, "TABLES")
    t.add(0, "TABLE")
    t.add(2, "LAYER")
    t.add(70, max(1, len(kinds)))
    for kind in kinds:
        t.add(0, "LAYER")
        t.add(2, _layer_name(kind))
        t.add(70, 0)
        t.add(62, _ACI[kind])
        t.add(6, "CONTINUOUS")
    t.add(0, "ENDTAB")
    t.add(0, "ENDSEC")

    t.add(0, "SECTION")
    t.add(2, "ENTITIES")
    for s in doc.series:
        _emit_series(t, s)
    t.add(0, "ENDSEC")
    t.add(0, "EOF")
    return t.text().encode("ascii", errors="replace")
