"""cloudatelier: survey point clouds to streamable octree tiles, typed
measurements with lossless JSON interchange, plane anchors, and a
curator-gated collaborative annotation layer protocol."""

from .core import Aabb, PointRecord, SourceSummary
from .ingest import cubify, open_source

__version__ = "0.1.0"

__all__ = [
    "Aabb", "PointRecord", "SourceSummary", "cubify", "open_source",
    "__version__",
]
