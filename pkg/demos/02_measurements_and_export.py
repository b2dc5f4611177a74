"""Measurements on a layer, their scalar values, and both export routes.

Builds a layer the way a client tool would: distance, angle, area, a
volume box and a text annotation, evaluates each series, then round-trips
the layer through the canonical JSON interchange and writes the DXF for
CAD handoff. The JSON route is lossless (unknown vendor fields survive);
the DXF route is one-way by design.
"""
import tempfile
from pathlib import Path

from cloudatelier.measure import (
    LayerDocument,
    evaluate,
    export_layer_dxf,
    export_layer_json,
    import_layer_json,
    new_series,
)


def main():
    series = (
        new_series("distance", [(0, 0, 0), (3, 4, 0)], label="hypotenuse"),
        new_series("angle", [(1, 0, 0), (0, 0, 0), (0, 1, 0)],
                   label="corner"),
        new_series("area", [(0, 0, 0), (4, 0, 0), (4, 3, 0), (0, 3, 0)],
                   label="slab"),
        new_series("volume", [(2, 2, 1)], box_extent=(4.0, 3.0, 2.0),
                   yaw=0.0, label="excavation"),
        new_series("annotation", [(1, 1, 0.2)], label="manhole cover",
                   extras={"vendorNote": "survey 2026-08-12"}),
    )
    for s in series:
        r = evaluate(s)
        vals = ", ".join(f"{v:.6g}" for v in r.values)
        print(f"{s.kind.value:<11} {s.label!r:<18} -> {vals}")

    doc = LayerDocument(id="5d1a9d2c-8a53-4c53-9d0e-7a5a1f3b2c10",
                        name="site walkthrough", series=series)

    blob = export_layer_json(doc)
    back = import_layer_json(blob)
    assert export_layer_json(back) == blob, "JSON round trip must be exact"
    print(f"\nJSON interchange: {len(blob)} bytes, round trip exact")
    note = back.get(series[4].id)
    print(f"vendor field preserved: {note.extras['vendorNote']!r}")

    with tempfile.TemporaryDirectory() as scratch:
        dxf_path = Path(scratch) / "layer.dxf"
        dxf_path.write_bytes(export_layer_dxf(doc))
        text = dxf_path.read_text(encoding="ascii")
        print(f"DXF export: {dxf_path.stat().st_size} bytes, "
              f"{text.count('POLYLINE')} polylines, "
              f"{text.count('TEXT')} text entities")


if __name__ == "__main__":
    main()
