"""Plane extraction over the decimated byproduct cloud."""
from .byproduct import (
    BIN_NAME,
    BYPRODUCT_DTYPE,
    JSON_NAME,
    read_byproduct,
    write_byproduct,
)
from .segment import (
    Plane,
    SegmentationResult,
    SegmenterConfig,
    anchor_to_plane,
    fit_plane_lsq,
    segment_planes,
)

__all__ = [
    "BIN_NAME",
    "BYPRODUCT_DTYPE",
    "JSON_NAME",
    "Plane",
    "SegmentationResult",
    "SegmenterConfig",
    "anchor_to_plane",
    "fit_plane_lsq",
    "read_byproduct",
    "segment_planes",
    "write_byproduct",
]
