"""Multiresolution octree tiles: build, manifest, tile codec, decimation."""
from .build import BuildConfig, build_index
from .decimate import decimate
from .manifest import (
    ATTRIBUTES,
    TILE_RECORD_SIZE,
    IndexManifest,
    OctreeNode,
    child_box,
    level_of,
    load_manifest,
    node_box,
    parent_of,
)
from .tiles import decode_tile, encode_tile, read_node

__all__ = [
    "ATTRIBUTES",
    "BuildConfig",
    "IndexManifest",
    "OctreeNode",
    "TILE_RECORD_SIZE",
    "build_index",
    "child_box",
    "decimate",
    "decode_tile",
    "encode_tile",
    "level_of",
    "load_manifest",
    "node_box",
    "parent_of",
    "read_node",
]
