import struct

import numpy as np
import pytest

from cloudatelier.core import Aabb
from cloudatelier.errors import (
    CorruptHeader, DegenerateExtent, MalformedRecord, UnsupportedFormat,
)
from cloudatelier.ingest import cubify, open_source

from oracle_las import quantize, write_las


# --- XYZ --------------------------------------------------------------------

def test_xyz_single_line(tmp_path):
    p = tmp_path / "one.xyz"
    p.write_text("1 2 3\n")
    src = open_source(str(p))
    recs = list(src.records())
    assert len(recs) == 1
    assert recs[0].position == (1.0, 2.0, 3.0)
    assert (recs[0].r, recs[0].g, recs[0].b) == (128, 128, 128)
    assert recs[0].intensity == 0
    assert src.summary.aabb == Aabb((1, 2, 3), (1, 2, 3))
    assert src.summary.point_count == 1
    assert not src.summary.has_color


def test_xyz_seven_columns_and_comments(tmp_path):
    p = tmp_path / "pts.xyz"
    p.write_text(
        "# surveyor export\n"
        "0 0 0 100 255 0 0\n"
        "1 1 1 200 0 255 0  # trailing note\n"
        "\n"
    )
    src = open_source(str(p))
    recs = list(src.records())
    assert len(recs) == 2
    assert recs[0].intensity == 100 and (recs[0].r, recs[0].g, recs[0].b) == (255, 0, 0)
    assert recs[1].intensity == 200 and recs[1].g == 255
    assert src.summary.has_color and src.summary.has_intensity


def test_xyz_too_few_fields(tmp_path):
    p = tmp_path / "bad.xyz"
    p.write_text("1 2\n")
    with pytest.raises(MalformedRecord):
        open_source(str(p))


def test_xyz_five_fields_ambiguous(tmp_path):
    p = tmp_path / "bad.xyz"
    p.write_text("1 2 3 4 5\n")
    with pytest.raises(MalformedRecord):
        open_source(str(p))


def test_xyz_mixed_column_count(tmp_path):
    p = tmp_path / "bad.xyz"
    p.write_text("1 2 3\n1 2 3 4\n")
    with pytest.raises(MalformedRecord):
        open_source(str(p))


def test_xyz_non_numeric(tmp_path):
    p = tmp_path / "bad.xyz"
    p.write_text("1 2 banana\n")
    with pytest.raises(MalformedRecord):
        open_source(str(p))


def test_empty_file_is_corrupt(tmp_path):
    p = tmp_path / "empty.xyz"
    p.write_text("")
    with pytest.raises(CorruptHeader):
        open_source(str(p))


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        open_source(str(tmp_path / "nope.xyz"))


def test_unknown_format(tmp_path):
    p = tmp_path / "blob.bin"
    p.write_bytes(b"\x00\x01\x02\x03 garbage")
    with pytest.raises(UnsupportedFormat):
        open_source(str(p))


# --- LAS --------------------------------------------------------------------

def test_las_scale_offset():
    # raw (250,0,0) with scale 0.01 and offset (100,0,0) decodes to 102.5
    assert 250 * 0.01 + 100 == pytest.approx(102.5)


def test_las_scale_offset_via_file(tmp_path):
    p = tmp_path / "scaled.las"
    write_las(p, [{"x": 102.5, "y": 0.0, "z": 0.0}],
              scale=(0.01, 0.01, 0.01), offset=(100.0, 0.0, 0.0))
    src = open_source(str(p))
    rec = next(src.records())
    assert rec.position == (102.5, 0.0, 0.0)
    assert src.summary.source_format == "LAS"


def test_las_roundtrip_within_one_quantum(tmp_path):
    rng = np.random.default_rng(7)
    scale = (0.001, 0.001, 0.001)
    offset = (10.0, -5.0, 100.0)
    pts = [{"x": float(x), "y": float(y), "z": float(z),
            "intensity": int(i), "classification": int(c)}
           for x, y, z, i, c in zip(
               rng.uniform(-50, 50, 500), rng.uniform(-50, 50, 500),
               rng.uniform(0, 30, 500), rng.integers(0, 65536, 500),
               rng.integers(0, 32, 500))]
    p = tmp_path / "rt.las"
    write_las(p, pts, point_format=1, scale=scale, offset=offset)
    src = open_source(str(p))
    recs = list(src.records())
    assert len(recs) == 500
    for got, want in zip(recs, pts):
        for axis, s, o in zip("xyz", scale, offset):
            assert abs(getattr(got, axis) - want[axis]) <= 0.5 * s + 1e-12
            # and exactly the quantized value the format stores
            assert getattr(got, axis) == pytest.approx(
                quantize(want[axis], s, o), abs=1e-12)
        assert got.intensity == want["intensity"]
        assert got.classification == want["classification"]


def test_las_16bit_color_downshift(tmp_path):
    pts = [{"x": 0.0, "y": 0.0, "z": 0.0,
            "red": 65535, "green": 32768, "blue": 255},
           {"x": 1.0, "y": 1.0, "z": 1.0,
            "red": 0, "green": 256, "blue": 51400}]
    p = tmp_path / "color16.las"
    write_las(p, pts, point_format=2)
    recs = list(open_source(str(p)).records())
    assert (recs[0].r, recs[0].g, recs[0].b) == (255, 128, 0)
    assert (recs[1].r, recs[1].g, recs[1].b) == (0, 1, 200)


def test_las_8bit_color_kept(tmp_path):
    pts = [{"x": 0.0, "y": 0.0, "z": 0.0, "red": 12, "green": 34, "blue": 56}]
    p = tmp_path / "color8.las"
    write_las(p, pts, point_format=2)
    rec = next(open_source(str(p)).records())
    assert (rec.r, rec.g, rec.b) == (12, 34, 56)


def test_las_bad_magic(tmp_path):
    p = tmp_path / "bad.las"
    p.write_bytes(b"NOPE" + b"\x00" * 300)
    with pytest.raises(CorruptHeader):
        open_source(str(p))


def test_las_count_overruns_file(tmp_path):
    p = tmp_path / "short.las"
    write_las(p, [{"x": 0.0, "y": 0.0, "z": 0.0}] * 4)
    data = bytearray(p.read_bytes())
    struct.pack_into("<I", data, 107, 10_000)  # claim more points than exist
    p.write_bytes(bytes(data))
    with pytest.raises(CorruptHeader):
        open_source(str(p))


def test_laz_refused_with_workaround(tmp_path):
    p = tmp_path / "cloud.laz"
    write_las(p, [{"x": 0.0, "y": 0.0, "z": 0.0}])
    data = bytearray(p.read_bytes())
    data[104] |= 0x80  # laszip marks compression in the format byte
    p.write_bytes(bytes(data))
    with pytest.raises(UnsupportedFormat, match="laszip"):
        open_source(str(p))


def test_las_waveform_format_refused(tmp_path):
    p = tmp_path / "wave.las"
    write_las(p, [{"x": 0.0, "y": 0.0, "z": 0.0}])
    data = bytearray(p.read_bytes())
    data[104] = 4
    p.write_bytes(bytes(data))
    with pytest.raises(UnsupportedFormat):
        open_source(str(p))


# --- PLY --------------------------------------------------------------------

PLY_ASCII_SQUARE = """ply
format ascii 1.0
comment unit square corners
element vertex 4
property float x
property float y
property float z
end_header
0 0 0
1 0 0
1 1 0
0 1 0
"""


def test_ply_ascii_unit_square(tmp_path):
    p = tmp_path / "square.ply"
    p.write_text(PLY_ASCII_SQUARE)
    src = open_source(str(p))
    assert src.summary.point_count == 4
    assert src.summary.aabb == Aabb((0, 0, 0), (1, 1, 0))
    assert src.summary.source_format == "PLY"


def _ply_binary(tmp_path, n=10, with_color=True, color_dtype="u1", seed=3):
    rng = np.random.default_rng(seed)
    xyz = rng.uniform(-4, 9, size=(n, 3)).astype(np.float32)
    header = ["ply", "format binary_little_endian 1.0", f"element vertex {n}",
              "property float x", "property float y", "property float z"]
    fields = [("x", "<f4"), ("y", "<f4"), ("z", "<f4")]
    if with_color:
        t = "uchar" if color_dtype == "u1" else "ushort"
        header += [f"property {t} red", f"property {t} green", f"property {t} blue"]
        np_t = "u1" if color_dtype == "u1" else "<u2"
        fields += [("red", np_t), ("green", np_t), ("blue", np_t)]
    header.append("end_header")
    arr = np.zeros(n, dtype=np.dtype(fields))
    arr["x"], arr["y"], arr["z"] = xyz[:, 0], xyz[:, 1], xyz[:, 2]
    if with_color:
        hi = 255 if color_dtype == "u1" else 65535
        for f in ("red", "green", "blue"):
            arr[f] = rng.integers(0, hi + 1, n)
    p = tmp_path / "cloud.ply"
    p.write_bytes("\n".join(header).encode() + b"\n" + arr.tobytes())
    return p, arr


def test_ply_binary_roundtrip(tmp_path):
    p, arr = _ply_binary(tmp_path, n=50)
    src = open_source(str(p))
    recs = list(src.records())
    assert len(recs) == 50
    for got, row in zip(recs, arr):
        assert got.x == pytest.approx(float(row["x"]), abs=1e-7)
        assert (got.r, got.g, got.b) == (row["red"], row["green"], row["blue"])


def test_ply_ushort_color_downshift(tmp_path):
    p, arr = _ply_binary(tmp_path, n=50, color_dtype="u2", seed=12)
    recs = list(open_source(str(p)).records())
    assert any(v > 255 for v in arr["red"])  # fixture really is 16-bit
    for got, row in zip(recs, arr):
        assert (got.r, got.g, got.b) == (
            row["red"] >> 8, row["green"] >> 8, row["blue"] >> 8)


def test_ply_skips_leading_element(tmp_path):
    content = (
        "ply\nformat ascii 1.0\n"
        "element junk 2\nproperty float a\n"
        "element vertex 1\n"
        "property float x\nproperty float y\nproperty float z\n"
        "end_header\n"
        "9.5\n8.5\n"
        "1 2 3\n"
    )
    p = tmp_path / "skip.ply"
    p.write_text(content)
    recs = list(open_source(str(p)).records())
    assert len(recs) == 1 and recs[0].position == (1.0, 2.0, 3.0)


def test_ply_truncated_body(tmp_path):
    p, arr = _ply_binary(tmp_path, n=10)
    data = p.read_bytes()
    p.write_bytes(data[:-8])
    with pytest.raises(CorruptHeader):
        open_source(str(p))


def test_ply_missing_end_header(tmp_path):
    p = tmp_path / "bad.ply"
    p.write_text("ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\n")
    with pytest.raises(CorruptHeader):
        open_source(str(p))


# --- shared stream properties -------------------------------------------------

def test_two_scans_identical(tmp_path):
    p, _ = _ply_binary(tmp_path, n=200, seed=9)
    src = open_source(str(p))
    a = np.concatenate(list(src.chunks()))
    b = np.concatenate(list(src.chunks()))
    assert np.array_equal(a, b)


def test_aabb_tight(tmp_path):
    p, arr = _ply_binary(tmp_path, n=64, seed=5)
    src = open_source(str(p))
    pts = np.concatenate(list(src.chunks()))
    box = src.summary.aabb
    for i, axis in enumerate(("x", "y", "z")):
        assert float(pts[axis].min()) == box.min[i]
        assert float(pts[axis].max()) == box.max[i]


def test_summary_counts_match_scan(tmp_path):
    p = tmp_path / "three.xyz"
    p.write_text("0 0 0\n5 5 5\n2 1 0\n")
    src = open_source(str(p))
    assert src.summary.point_count == sum(len(c) for c in src.chunks())


# --- cubify -------------------------------------------------------------------

def test_cubify_grows_to_max_extent():
    assert cubify(Aabb((0, 0, 0), (2, 1, 1))) == Aabb((0, 0, 0), (2, 2, 2))


def test_cubify_already_cubic():
    box = Aabb((-1, -1, -1), (1, 1, 1))
    assert cubify(box) == box


def test_cubify_single_point_fallback():
    assert cubify(Aabb((0, 0, 0), (0, 0, 0))) == Aabb((0, 0, 0), (1, 1, 1))


def test_cubify_single_point_file(tmp_path):
    p = tmp_path / "one.xyz"
    p.write_text("3 4 5\n")
    src = open_source(str(p))
    cube = cubify(src.summary.aabb, src.summary.point_count)
    assert cube == Aabb((3, 4, 5), (4, 5, 6))


def test_cubify_degenerate_claim():
    with pytest.raises(DegenerateExtent):
        cubify(Aabb((1, 1, 1), (1, 1, 1)), point_count=2)


def test_cubify_contains_input():
    box = Aabb((-3, 2, 0), (4, 2.5, 9))
    cube = cubify(box)
    edges = cube.extent
    assert edges[0] == edges[1] == edges[2] == max(box.extent)
    assert all(c_lo <= lo and hi <= c_hi for lo, hi, c_lo, c_hi
               in zip(box.min, box.max, cube.min, cube.max))
