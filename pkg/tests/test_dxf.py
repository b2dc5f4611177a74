import math
import uuid

import pytest

from cloudatelier.measure import LayerDocument, export_layer, new_series

import oracle_dxf


def make_doc(series):
    return LayerDocument(id=str(uuid.uuid4()), name="dxf", series=tuple(series))


def export_text(doc) -> str:
    return export_layer(doc, "dxf").decode("ascii")


def test_polygon_parses_as_one_polyline_three_vertices():
    doc = make_doc([new_series("polygon",
                               [(0, 0, 0), (4, 0, 0), (2, 3, 0.5)])])
    text = export_text(doc)
    pls = oracle_dxf.polylines(text)
    assert len(pls) == 1
    assert len(pls[0]["vertices"]) == 3
    assert pls[0]["closed"] is True
    assert pls[0]["layer"] == "POLYGON"
    assert pls[0]["vertices"][2] == (2.0, 3.0, 0.5)


def test_distance_polyline_open():
    doc = make_doc([new_series("distance", [(0, 0, 0), (3, 4, 0), (3, 4, 2)])])
    pls = oracle_dxf.polylines(export_text(doc))
    assert len(pls) == 1
    assert pls[0]["closed"] is False
    assert pls[0]["layer"] == "DISTANCE"
    assert len(pls[0]["vertices"]) == 3


def test_area_gets_face_fan():
    doc = make_doc([new_series("area",
                               [(0, 0, 0), (2, 0, 0), (2, 2, 0), (0, 2, 0)])])
    text = export_text(doc)
    fan = oracle_dxf.faces(text)
    assert len(fan) == 2  # quad fan = two triangles
    assert all(f["layer"] == "AREA" for f in fan)
    # fan shares the first vertex
    assert all(f["corners"][0] == (0.0, 0.0, 0.0) for f in fan)
    # triangles: last corner repeats
    assert all(f["corners"][2] == f["corners"][3] for f in fan)


def test_annotation_and_labels_become_text():
    doc = make_doc([
        new_series("annotation", [(1, 2, 3)], label="break line"),
        new_series("distance", [(0, 0, 0), (1, 0, 0)], label="d1"),
    ])
    text = export_text(doc)
    texts = oracle_dxf.texts(text)
    contents = {t["content"] for t in texts}
    assert contents == {"break line", "d1"}
    note = next(t for t in texts if t["layer"] == "ANNOTATION")
    assert note["position"] == (1.0, 2.0, 3.0)
    assert note["height"] > 0


def test_one_layer_per_kind():
    doc = make_doc([
        new_series("distance", [(0, 0, 0), (1, 0, 0)]),
        new_series("distance", [(0, 0, 0), (0, 1, 0)]),
        new_series("polygon", [(0, 0, 0), (1, 0, 0), (0, 1, 0)]),
        new_series("annotation", [(0, 0, 0)], label="x"),
    ])
    names = oracle_dxf.layer_names(export_text(doc))
    assert names == ["DISTANCE", "POLYGON", "ANNOTATION"]


def test_volume_exports_two_rings_with_yaw():
    yaw = math.pi / 4
    doc = make_doc([new_series("volume", [(0, 0, 10)],
                               box_extent=(2.0, 2.0, 4.0), yaw=yaw)])
    pls = oracle_dxf.polylines(export_text(doc))
    assert len(pls) == 2
    bottom, top = pls
    assert all(v[2] == 8.0 for v in bottom["vertices"])
    assert all(v[2] == 12.0 for v in top["vertices"])
    # 45° yaw puts the square's corners on the axes
    radius = math.hypot(1.0, 1.0)
    for x, y, _ in bottom["vertices"]:
        assert math.hypot(x, y) == pytest.approx(radius)
        assert min(abs(x), abs(y)) == pytest.approx(0.0, abs=1e-12)


def test_height_and_profile_layers():
    doc = make_doc([
        new_series("height", [(0, 0, 0), (0, 0, 5)]),
        new_series("profile", [(0, 0, 0), (10, 0, 0)], profile_width=2.0),
    ])
    pls = oracle_dxf.polylines(export_text(doc))
    layers = [p["layer"] for p in pls]
    assert layers == ["HEIGHT", "PROFILE"]
    assert all(not p["closed"] for p in pls)


def test_header_declares_r12():
    doc = make_doc([])
    tags = oracle_dxf.parse_tags(export_text(doc))
    header = oracle_dxf.sections(tags)["HEADER"]
    assert (9, "$ACADVER") in header
    assert (1, "AC1009") in header
    assert tags[-1] == (0, "EOF")
