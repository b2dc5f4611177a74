"""Measurements, annotations and interchange (JSON both ways, DXF out)."""
from .dxf import export_layer_dxf
from .evaluate import (
    MeasurementResult,
    evaluate,
    newell_area,
    polyline_length,
    triangle_angles,
)
from .jsonio import (
    SCHEMA_TAG,
    canonical_json,
    export_layer,
    export_layer_json,
    import_layer,
    import_layer_json,
)
from .model import (
    LayerDocument,
    MeasurementSeries,
    SeriesKind,
    Vertex3,
    new_series,
)
from .profile import PROFILE_DTYPE, extract_profile, project_to_polyline
from .snapping import snap

__all__ = [
    "LayerDocument",
    "MeasurementResult",
    "MeasurementSeries",
    "PROFILE_DTYPE",
    "SCHEMA_TAG",
    "SeriesKind",
    "Vertex3",
    "canonical_json",
    "evaluate",
    "export_layer",
    "export_layer_dxf",
    "export_layer_json",
    "extract_profile",
    "import_layer",
    "import_layer_json",
    "new_series",
    "newell_area",
    "polyline_length",
    "project_to_polyline",
    "snap",
    "triangle_angles",
]
