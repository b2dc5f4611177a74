"""Child process for the out-of-core memory check.

Builds an index from a chunk-generated synthetic cloud that is never fully
resident, then reports its own peak RSS. Run:

    python3 rss_probe.py <point_count> <out_dir>
"""
import json
import resource
import sys
from pathlib import Path

import numpy as np

from cloudatelier.core import POINT_DTYPE, AabbAccumulator, SourceSummary
from cloudatelier.octree import BuildConfig, build_index

CHUNK = 250_000


class SynthSource:
    """Uniform cloud regenerated chunk-by-chunk from per-chunk seeds."""

    def __init__(self, n: int):
        self.n = n
        acc = AabbAccumulator()
        for chunk in self.chunks():
            acc.add(chunk)
        self.summary = SourceSummary(
            point_count=n,
            aabb=acc.result(),
            has_color=True,
            has_intensity=True,
            source_format="memory",
        )

    def chunks(self):
        made = 0
        index = 0
        while made < self.n:
            m = min(CHUNK, self.n - made)
            rng = np.random.default_rng(7_000_000 + index)
            out = np.zeros(m, dtype=POINT_DTYPE)
            xyz = rng.uniform(0.0, 10.0, size=(m, 3))
            out["x"], out["y"], out["z"] = xyz[:, 0], xyz[:, 1], xyz[:, 2]
            out["r"] = out["g"] = out["b"] = 99
            yield out
            made += m
            index += 1


def main() -> int:
    n = int(sys.argv[1])
    out = Path(sys.argv[2])
    # low threshold forces the sharded out-of-core path at both sizes
    cfg = BuildConfig(chunk_threshold=500_000)
    manifest = build_index(SynthSource(n), cfg, out)
    print(json.dumps({
        "maxrss_kb": resource.getrusage(resource.RUSAGE_SELF).ru_maxrss,
        "points": manifest.total_points,
        "nodes": len(manifest.nodes),
    }))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
