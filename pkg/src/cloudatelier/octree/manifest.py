"""Octree addressing and the on-disk hierarchy manifest.

Node codes are strings over 0-7 rooted at "r"; digit bits are
(x-high)<<2 | (y-high)<<1 | (z-high). The manifest is canonical JSON
(sorted keys, compact separators) so identical builds are byte-identical.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from ..core import Aabb
from ..errors import CorruptHeader

CODE_RE = re.compile(r"^r[0-7]*$")

ATTRIBUTES = [
    {"name": "position", "type": "f32", "size": 12},
    {"name": "rgb", "type": "u8", "size": 3},
    {"name": "intensity", "type": "u16", "size": 2},
    {"name": "classification", "type": "u8", "size": 1},
]
TILE_RECORD_SIZE = sum(a["size"] for a in ATTRIBUTES)


def level_of(code: str) -> int:
    return len(code) - 1


def parent_of(code: str) -> str:
    if code == "r":
        raise ValueError("root has no parent")
    return code[:-1]


def child_box(box: Aabb, digit: int) -> Aabb:
    lo, hi = [], []
    for axis in range(3):
        mid = (box.min[axis] + box.max[axis]) / 2.0
        if digit >> (2 - axis) & 1:
            lo.append(mid)
            hi.append(box.max[axis])
        else:
            lo.append(box.min[axis])
            hi.append(mid)
    return Aabb(tuple(lo), tuple(hi))


def node_box(root: Aabb, code: str) -> Aabb:
    box = root
    for d in code[1:]:
        box = child_box(box, int(d))
    return box


@dataclass
class OctreeNode:
    code: str
    count: int
    aabb: Aabb
    overflow: bool = False

    @property
    def level(self) -> int:
        return level_of(self.code)

    def to_json(self) -> dict:
        obj = {"code": self.code, "count": self.count, "aabb": self.aabb.to_json()}
        if self.overflow:
            obj["overflow"] = True
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "OctreeNode":
        return cls(obj["code"], int(obj["count"]), Aabb.from_json(obj["aabb"]),
                   bool(obj.get("overflow", False)))


@dataclass
class IndexManifest:
    aabb: Aabb                    # cubified root
    root_spacing: float
    total_points: int
    entwine_mode: bool
    nodes: dict[str, OctreeNode]
    version: str = "1"
    directory: Path | None = field(default=None, compare=False)

    def spacing(self, code: str) -> float:
        return self.root_spacing / (2 ** level_of(code))

    def tile_path(self, code: str) -> Path:
        if self.directory is None:
            raise ValueError("manifest has no backing directory")
        return self.directory / "nodes" / f"{code}.bin"

    def to_json(self) -> dict:
        return {
            "version": self.version,
            "aabb": self.aabb.to_json(),
            "rootSpacing": self.root_spacing,
            "totalPoints": self.total_points,
            "attributes": ATTRIBUTES,
            "entwineMode": self.entwine_mode,
            "nodes": [self.nodes[c].to_json() for c in sorted(self.nodes)],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True,
                          separators=(",", ":"), ensure_ascii=False) + "\n"

    def write(self, directory: Path) -> Path:
        path = Path(directory) / "manifest.json"
        path.write_text(self.dumps(), encoding="utf-8")
        self.directory = Path(directory)
        return path

    @classmethod
    def from_json(cls, obj: dict, directory: Path | None = None) -> "IndexManifest":
        if obj.get("version") != "1":
            raise CorruptHeader(f"unsupported manifest version {obj.get('version')!r}")
        nodes = {}
        for entry in obj["nodes"]:
            node = OctreeNode.from_json(entry)
            if not CODE_RE.match(node.code):
                raise CorruptHeader(f"invalid node code {node.code!r}")
            nodes[node.code] = node
        return cls(
            aabb=Aabb.from_json(obj["aabb"]),
            root_spacing=float(obj["rootSpacing"]),
            total_points=int(obj["totalPoints"]),
            entwine_mode=bool(obj.get("entwineMode", False)),
            nodes=nodes,
            directory=directory,
        )


def load_manifest(directory: Path | str) -> IndexManifest:
    directory = Path(directory)
    path = directory / "manifest.json"
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorruptHeader(f"{path}: invalid JSON: {exc}") from exc
    return IndexManifest.from_json(obj, directory)
