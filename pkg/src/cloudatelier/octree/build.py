"""Streaming octree construction with bounded memory.

A point is accepted by the shallowest node whose occupancy grid (cell size
= node spacing) has a free cell at the point's cell and which still has
stored-point capacity; everything else descends into the child octant.
Children are spawned lazily, only to receive rejected points. At
cfg.max_depth the grid test is waived, the node keeps every residual point
and is flagged as an overflow node.

Pending points live in per-node stores that spill to disk past a small
memory budget, so the resident buffer is bounded regardless of input size.
Beyond cfg.chunk_threshold points the build switches to the massive-dataset
organization: a shard pass splits the input into spatial chunk files, each
chunk becomes an independent subtree, and the levels above the chunk roots
are populated by promoting points up out of their children.
"""
from __future__ import annotations

import errno
import math
import shutil
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from ..core import CHUNK_POINTS, POINT_DTYPE, Aabb, SourceSummary, positions
from ..errors import OutOfDiskSpace
from ..ingest import cubify
from .manifest import IndexManifest, OctreeNode, child_box, node_box
from .tiles import encode_tile

MAX_SHARD_DEPTH = 6  # 64^3 chunk files


@dataclass(frozen=True)
class BuildConfig:
    root_spacing_divisor: float = 250.0
    node_capacity: int = 20_000
    max_depth: int = 16
    chunk_threshold: int = 100_000_000
    flush_threshold: int = 1_000_000
    threads: int = 1

    def validated(self) -> "BuildConfig":
        if self.root_spacing_divisor <= 0:
            raise ValueError("root_spacing_divisor must be > 0")
        if self.node_capacity < 1000:
            raise ValueError("node_capacity must be >= 1000")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.flush_threshold < 4096:
            raise ValueError("flush_threshold must be >= 4096")
        return replace(self, threads=max(1, self.threads))


class _PendingStore:
    """Append-order point queue, spilling to one disk file past a budget."""

    def __init__(self, path: Path, mem_limit: int, chunk_points: int):
        self.path = path
        self.mem_limit = mem_limit
        self.chunk_points = chunk_points
        self._mem: list[np.ndarray] = []
        self._mem_points = 0
        self._disk_points = 0

    @property
    def count(self) -> int:
        return self._mem_points + self._disk_points

    def append(self, arr: np.ndarray) -> None:
        if len(arr) == 0:
            return
        if self._mem_points + len(arr) > self.mem_limit:
            self._spill()
        if len(arr) > self.mem_limit:
            self._write(arr)
        else:
            self._mem.append(arr.copy())
            self._mem_points += len(arr)

    def _spill(self) -> None:
        if self._mem:
            self._write(np.concatenate(self._mem))
            self._mem = []
            self._mem_points = 0

    def _write(self, arr: np.ndarray) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "ab") as f:
            f.write(arr.tobytes())
        self._disk_points += len(arr)

    def __iter__(self) -> Iterator[np.ndarray]:
        return self.chunks()

    def chunks(self) -> Iterator[np.ndarray]:
        if self._disk_points:
            with open(self.path, "rb") as f:
                remaining = self._disk_points
                while remaining > 0:
                    n = min(remaining, self.chunk_points)
                    yield np.frombuffer(f.read(n * POINT_DTYPE.itemsize),
                                        dtype=POINT_DTYPE)
                    remaining -= n
        for arr in self._mem:
            yield arr

    def drop(self) -> None:
        self._mem = []
        if self._disk_points:
            self.path.unlink(missing_ok=True)


class _F64Writer:
    """Raw POINT_DTYPE append file (entwine intermediate)."""

    def __init__(self, path: Path):
        self.path = path
        self.count = 0
        self._f = None

    def append(self, arr: np.ndarray) -> None:
        if len(arr) == 0:
            return
        if self._f is None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._f = open(self.path, "wb")
        self._f.write(arr.tobytes())
        self.count += len(arr)

    def close(self) -> None:
        if self._f is not None:
            self._f.close()
            self._f = None


class _TileWriter:
    """Encodes accepted points straight into the node's tile file."""

    def __init__(self, path: Path, box: Aabb):
        self.path = path
        self.box = box
        self.count = 0
        self._f = None

    def append(self, arr: np.ndarray) -> None:
        if len(arr) == 0:
            return
        if self._f is None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._f = open(self.path, "wb")
        self._f.write(encode_tile(arr, self.box))
        self.count += len(arr)

    def close(self) -> None:
        if self._f is not None:
            self._f.close()
            self._f = None


def _read_f64(path: Path, chunk_points: int) -> Iterator[np.ndarray]:
    with open(path, "rb") as f:
        while True:
            buf = f.read(chunk_points * POINT_DTYPE.itemsize)
            if not buf:
                return
            yield np.frombuffer(buf, dtype=POINT_DTYPE)


class Builder:
    def __init__(self, summary: SourceSummary, cfg: BuildConfig, out_dir: Path):
        self.cfg = cfg.validated()
        self.out_dir = Path(out_dir)
        self.root_aabb = cubify(summary.aabb)
        edge = self.root_aabb.extent[0]
        self.root_spacing = self.root_aabb.diagonal / self.cfg.root_spacing_divisor
        # grid resolution is scale-free: node edge and spacing halve together
        self.cells_per_axis = max(1, int(math.ceil(edge / self.root_spacing - 1e-9)))
        self.total_points = summary.point_count
        self.entwine = summary.point_count > self.cfg.chunk_threshold
        self.scratch = self.out_dir / ".build-tmp"
        self._store_budget = max(8192, self.cfg.flush_threshold // 64)

    # --- geometry helpers ---------------------------------------------------

    def _cells(self, chunk: np.ndarray, box: Aabb, spacing: float) -> np.ndarray:
        cpa = self.cells_per_axis
        idx = None
        for i, axis in enumerate(("x", "y", "z")):
            ci = ((chunk[axis] - box.min[i]) / spacing).astype(np.int64)
            np.clip(ci, 0, cpa - 1, out=ci)
            idx = ci if idx is None else idx * cpa + ci
        return idx

    @staticmethod
    def _octants(chunk: np.ndarray, box: Aabb) -> np.ndarray:
        cx, cy, cz = box.center
        return ((chunk["x"] >= cx).astype(np.int8) * 4
                + (chunk["y"] >= cy).astype(np.int8) * 2
                + (chunk["z"] >= cz).astype(np.int8))

    def _pending_store(self, code: str) -> _PendingStore:
        return _PendingStore(self.scratch / "pending" / f"{code}.spill",
                             self._store_budget, CHUNK_POINTS)

    def _writer(self, code: str, box: Aabb):
        if self.entwine:
            return _F64Writer(self.scratch / "f64" / f"{code}.pts")
        return _TileWriter(self.out_dir / "nodes" / f"{code}.bin", box)

    # --- one node ------------------------------------------------------------

    def _one(self, code: str, box: Aabb, pending: Iterable[np.ndarray]):
        """Consume a node's pending points; returns (entry, child work)."""
        level = len(code) - 1
        spacing = self.root_spacing / (2 ** level)
        at_floor = level >= self.cfg.max_depth
        capacity = self.cfg.node_capacity
        cpa = self.cells_per_axis
        grid = None
        stored = 0
        overflow = False
        writer = self._writer(code, box)
        children: dict[int, _PendingStore] = {}

        for chunk in pending:
            if len(chunk) == 0:
                continue
            if at_floor:
                # residuals bypass grid and capacity; track whether that mattered
                if not overflow:
                    cells = self._cells(chunk, box, spacing)
                    if grid is None:
                        grid = np.zeros(cpa ** 3, dtype=bool)
                    uniq = np.unique(cells)
                    fresh = int((~grid[uniq]).sum())
                    if fresh < len(chunk) or stored + len(chunk) > capacity:
                        overflow = True
                    grid[uniq] = True
                writer.append(chunk)
                stored += len(chunk)
                continue

            if stored >= capacity:
                rejected = chunk
            else:
                cells = self._cells(chunk, box, spacing)
                if grid is None:
                    grid = np.zeros(cpa ** 3, dtype=bool)
                uniq, first = np.unique(cells, return_index=True)
                cand = np.sort(first[~grid[uniq]])
                cand = cand[:capacity - stored]
                mask = np.zeros(len(chunk), dtype=bool)
                mask[cand] = True
                grid[cells[cand]] = True
                writer.append(chunk[mask])
                stored += len(cand)
                rejected = chunk[~mask]

            if len(rejected):
                octs = self._octants(rejected, box)
                for digit in np.unique(octs):
                    store = children.get(digit)
                    if store is None:
                        store = children[digit] = self._pending_store(
                            code + str(digit))
                    store.append(rejected[octs == digit])

        writer.close()
        entry = OctreeNode(code, stored, box, overflow)
        work = [(code + str(d), child_box(box, d), children[d])
                for d in sorted(children)]
        return entry, work

    def _subtree(self, code: str, box: Aabb,
                 pending: Iterable[np.ndarray]) -> list[OctreeNode]:
        entries = []
        stack = [(code, box, pending)]
        while stack:
            c, b, pend = stack.pop()
            entry, work = self._one(c, b, pend)
            if isinstance(pend, _PendingStore):
                pend.drop()
            entries.append(entry)
            stack.extend(reversed(work))
        return entries

    # --- whole builds ----------------------------------------------------------

    def build(self, chunks: Iterable[np.ndarray]) -> IndexManifest:
        try:
            if self.entwine:
                entries = self._build_entwine(chunks)
            else:
                entries = self._build_plain(chunks)
        except OSError as exc:
            if exc.errno == errno.ENOSPC:
                raise OutOfDiskSpace(str(exc)) from exc
            raise
        finally:
            shutil.rmtree(self.scratch, ignore_errors=True)

        manifest = IndexManifest(
            aabb=self.root_aabb,
            root_spacing=self.root_spacing,
            total_points=sum(e.count for e in entries),
            entwine_mode=self.entwine,
            nodes={e.code: e for e in entries},
        )
        manifest.write(self.out_dir)
        return manifest

    def _build_plain(self, chunks: Iterable[np.ndarray]) -> list[OctreeNode]:
        if self.cfg.threads <= 1:
            return self._subtree("r", self.root_aabb, chunks)
        root_entry, work = self._one("r", self.root_aabb, chunks)
        entries = [root_entry]
        with ThreadPoolExecutor(max_workers=self.cfg.threads) as pool:
            futures = [pool.submit(self._subtree, c, b, p) for c, b, p in work]
            for fut in futures:
                entries.extend(fut.result())
        return entries

    # --- massive-dataset organization -----------------------------------------

    def _shard_depth(self) -> int:
        target = self.total_points / (16 * self.cfg.node_capacity)
        depth = 1
        while 8 ** depth < target and depth < MAX_SHARD_DEPTH:
            depth += 1
        return depth

    def _shard(self, chunks: Iterable[np.ndarray], depth: int) -> dict[str, _PendingStore]:
        edge = self.root_aabb.extent[0]
        root_min = np.array(self.root_aabb.min)
        budget = max(4096, self.cfg.flush_threshold // (8 ** depth))
        stores: dict[str, _PendingStore] = {}
        for chunk in chunks:
            pos = positions(chunk)
            cur_min = np.tile(root_min, (len(chunk), 1))
            half = edge / 2.0
            digit_cols = []
            for _ in range(depth):
                hi = pos >= (cur_min + half)
                digit_cols.append(hi[:, 0] * 4 + hi[:, 1] * 2 + hi[:, 2])
                cur_min += hi * half
                half /= 2.0
            idx = digit_cols[0].astype(np.int64)
            for col in digit_cols[1:]:
                idx = idx * 8 + col
            for flat in np.unique(idx):
                digits = []
                v = int(flat)
                for _ in range(depth):
                    digits.append(v % 8)
                    v //= 8
                code = "r" + "".join(str(d) for d in reversed(digits))
                store = stores.get(code)
                if store is None:
                    store = stores[code] = _PendingStore(
                        self.scratch / "shard" / f"{code}.spill",
                        budget, CHUNK_POINTS)
                store.append(chunk[idx == flat])
        return stores

    def _build_entwine(self, chunks: Iterable[np.ndarray]) -> list[OctreeNode]:
        depth = self._shard_depth()
        stores = self._shard(chunks, depth)
        jobs = [(code, node_box(self.root_aabb, code), stores[code])
                for code in sorted(stores)]
        entries: list[OctreeNode] = []
        if self.cfg.threads <= 1:
            for code, box, store in jobs:
                entries.extend(self._subtree(code, box, store))
        else:
            with ThreadPoolExecutor(max_workers=self.cfg.threads) as pool:
                futures = [pool.submit(self._subtree, c, b, s)
                           for c, b, s in jobs]
                for fut in futures:
                    entries.extend(fut.result())

        by_code = {e.code: e for e in entries}
        for level in range(depth - 1, -1, -1):
            self._promote_level(by_code, level)
        entries = [by_code[c] for c in sorted(by_code)]

        # intermediate f64 files become the final tiles
        for entry in entries:
            writer = _TileWriter(self.out_dir / "nodes" / f"{entry.code}.bin",
                                 entry.aabb)
            src = self.scratch / "f64" / f"{entry.code}.pts"
            for chunk in _read_f64(src, CHUNK_POINTS):
                writer.append(chunk)
            writer.close()
        return entries

    def _promote_level(self, by_code: dict[str, OctreeNode], level: int) -> None:
        """Populate level-`level` parents by pulling points out of children."""
        parents = sorted({c[:-1] for c in by_code
                          if len(c) - 1 == level + 1 and c[:-1] not in by_code})
        for parent in parents:
            box = node_box(self.root_aabb, parent)
            spacing = self.root_spacing / (2 ** level)
            grid = np.zeros(self.cells_per_axis ** 3, dtype=bool)
            capacity = self.cfg.node_capacity
            writer = _F64Writer(self.scratch / "f64" / f"{parent}.pts")
            stored = 0

            kids = [parent + d for d in "01234567" if parent + d in by_code]
            streams = []
            for kid in kids:
                src = self.scratch / "f64" / f"{kid}.pts"
                keep = _F64Writer(self.scratch / "f64" / f"{kid}.keep")
                # every child retains at least one point
                streams.append({
                    "code": kid,
                    "iter": _read_f64(src, min(CHUNK_POINTS, 16384)),
                    "keep": keep,
                    "budget": by_code[kid].count - 1,
                })

            # round-robin over children so coarse levels sample all octants
            active = list(streams)
            while active:
                nxt = []
                for st in active:
                    chunk = next(st["iter"], None)
                    if chunk is None:
                        continue
                    take = min(capacity - stored, st["budget"])
                    if take <= 0:
                        st["keep"].append(chunk)
                    else:
                        cells = self._cells(chunk, box, spacing)
                        uniq, first = np.unique(cells, return_index=True)
                        cand = np.sort(first[~grid[uniq]])[:take]
                        mask = np.zeros(len(chunk), dtype=bool)
                        mask[cand] = True
                        grid[cells[cand]] = True
                        writer.append(chunk[mask])
                        st["keep"].append(chunk[~mask])
                        stored += len(cand)
                        st["budget"] -= len(cand)
                    nxt.append(st)
                active = nxt

            for st in streams:
                st["keep"].close()
                src = self.scratch / "f64" / f"{st['code']}.pts"
                keep_path = self.scratch / "f64" / f"{st['code']}.keep"
                if keep_path.exists():
                    keep_path.replace(src)
                by_code[st["code"]] = replace(by_code[st["code"]],
                                              count=self._f64_count(src))
            writer.close()
            if stored == 0:
                stored = self._force_pull(by_code, parent, writer.path)
            by_code[parent] = OctreeNode(parent, stored, box)

    def _f64_count(self, path: Path) -> int:
        if not path.exists():
            return 0
        return path.stat().st_size // POINT_DTYPE.itemsize

    def _force_pull(self, by_code: dict[str, OctreeNode], parent: str,
                    dest: Path) -> int:
        """Last resort: move one point up so the parent is never empty."""
        for digit in "01234567":
            kid = parent + digit
            if kid not in by_code:
                continue
            moved = self._take_first_point(by_code, kid)
            if moved is not None:
                with open(dest, "ab") as f:
                    f.write(moved.tobytes())
                return 1
        return 0

    def _take_first_point(self, by_code, code) -> np.ndarray | None:
        node = by_code[code]
        path = self.scratch / "f64" / f"{code}.pts"
        data = path.read_bytes() if path.exists() else b""
        n = len(data) // POINT_DTYPE.itemsize
        if n == 0:
            return None
        first = np.frombuffer(data[:POINT_DTYPE.itemsize], dtype=POINT_DTYPE)
        rest = data[POINT_DTYPE.itemsize:]
        path.write_bytes(rest)
        if n - 1 == 0:
            has_kids = any(code + d in by_code for d in "01234567")
            if has_kids:
                # refill from below so the invariant holds all the way down
                self._force_pull(by_code, code, path)
                by_code[code] = replace(node, count=self._f64_count(path))
            else:
                path.unlink(missing_ok=True)
                del by_code[code]
        else:
            by_code[code] = replace(node, count=n - 1)
        return first


def build_index(source, cfg: BuildConfig | None = None,
                out_dir: Path | str = "out") -> IndexManifest:
    """Convert an opened point source into a tile set + manifest."""
    cfg = (cfg or BuildConfig()).validated()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    builder = Builder(source.summary, cfg, out_dir)
    return builder.build(source.chunks())
