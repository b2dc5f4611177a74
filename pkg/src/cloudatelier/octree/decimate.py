"""Seeded reservoir decimation of a point stream."""
from __future__ import annotations

from typing import Iterable

import numpy as np

from ..core import POINT_DTYPE


def decimate(chunks: Iterable[np.ndarray], target_count: int,
             seed: int = 0) -> np.ndarray:
    """Uniform sample of min(target_count, n) points.

    Classic reservoir replacement (one draw per point past the fill), so the
    result depends only on the seed and the point order, not on how the
    stream is chunked. Survivors come back in input order.
    """
    if target_count < 1:
        raise ValueError("target_count must be >= 1")
    rng = np.random.default_rng(seed)
    reservoir = np.empty(target_count, dtype=POINT_DTYPE)
    slot_index = np.empty(target_count, dtype=np.int64)
    seen = 0
    for chunk in chunks:
        k = len(chunk)
        if k == 0:
            continue
        offset = 0
        if seen < target_count:
            take = min(target_count - seen, k)
            reservoir[seen:seen + take] = chunk[:take]
            slot_index[seen:seen + take] = seen + np.arange(take)
            offset = take
            seen += take
        if offset < k:
            tail = chunk[offset:]
            global_idx = seen + np.arange(len(tail), dtype=np.int64)
            draws = rng.integers(0, global_idx + 1)
            hits = np.nonzero(draws < target_count)[0]
            for pos in hits:
                slot = draws[pos]
                reservoir[slot] = tail[pos]
                slot_index[slot] = global_idx[pos]
            seen += len(tail)
    if seen < target_count:
        order = np.argsort(slot_index[:seen], kind="stable")
        return reservoir[:seen][order]
    return reservoir[np.argsort(slot_index, kind="stable")]
