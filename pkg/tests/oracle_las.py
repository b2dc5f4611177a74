"""Test-only LAS 1.2 writer, built straight from the public field layout.

Intentionally independent of the package's reader: records are packed
field by field with `struct`, so fixtures exercise the production parser
against a second implementation of the format.
"""
from __future__ import annotations

import struct

HEADER_SIZE = 227
FORMAT_LENGTH = {0: 20, 1: 28, 2: 26, 3: 34}


def write_las(path, points, *, point_format=0, scale=(0.001, 0.001, 0.001),
              offset=(0.0, 0.0, 0.0), version=(1, 2)):
    """Write raw-ish point dicts as an uncompressed LAS file.

    Each point is a dict with keys x,y,z in meters (quantized here via
    scale/offset) and optional intensity, classification, red, green, blue.
    """
    record_len = FORMAT_LENGTH[point_format]
    n = len(points)

    xs = [p["x"] for p in points]
    ys = [p["y"] for p in points]
    zs = [p["z"] for p in points]

    header = bytearray(HEADER_SIZE)
    header[0:4] = b"LASF"
    header[24] = version[0]
    header[25] = version[1]
    struct.pack_into("<H", header, 94, HEADER_SIZE)
    struct.pack_into("<I", header, 96, HEADER_SIZE)  # points follow header
    struct.pack_into("<I", header, 100, 0)           # no VLRs
    header[104] = point_format
    struct.pack_into("<H", header, 105, record_len)
    struct.pack_into("<I", header, 107, n)
    struct.pack_into("<3d", header, 131, *scale)
    struct.pack_into("<3d", header, 155, *offset)
    struct.pack_into("<6d", header, 179,
                     max(xs), min(xs), max(ys), min(ys), max(zs), min(zs))

    body = bytearray()
    for p in points:
        raw = [round((p[a] - offset[i]) / scale[i])
               for i, a in enumerate("xyz")]
        rec = struct.pack("<3i", *raw)
        rec += struct.pack("<H", p.get("intensity", 0))
        rec += struct.pack("<B", p.get("return_info", 0))
        rec += struct.pack("<B", p.get("classification", 0))
        rec += struct.pack("<b", p.get("scan_angle", 0))
        rec += struct.pack("<B", p.get("user_data", 0))
        rec += struct.pack("<H", p.get("point_source", 0))
        if point_format in (1, 3):
            rec += struct.pack("<d", p.get("gps_time", 0.0))
        if point_format in (2, 3):
            rec += struct.pack("<3H", p.get("red", 0), p.get("green", 0),
                               p.get("blue", 0))
        assert len(rec) == record_len
        body += rec

    with open(path, "wb") as f:
        f.write(header)
        f.write(body)


def quantize(value, scale_axis, offset_axis):
    """The position a LAS round-trip should reproduce exactly."""
    return round((value - offset_axis) / scale_axis) * scale_axis + offset_axis
