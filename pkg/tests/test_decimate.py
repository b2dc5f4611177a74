import numpy as np

from cloudatelier.octree import decimate

from conftest import make_cloud, uniform_cloud


def chunked(arr, size):
    for start in range(0, len(arr), size):
        yield arr[start:start + size]


def test_target_above_n_returns_everything_in_order():
    pts = uniform_cloud(5, seed=1)
    out = decimate(chunked(pts, 2), target_count=10, seed=0)
    assert len(out) == 5
    assert np.array_equal(out, pts)


def test_single_point():
    pts = make_cloud([(1.0, 2.0, 3.0)])
    out = decimate(chunked(pts, 1), target_count=1, seed=42)
    assert len(out) == 1
    assert out["x"][0] == 1.0


def test_exact_count_and_determinism():
    pts = uniform_cloud(10000, seed=3)
    a = decimate(chunked(pts, 1000), target_count=100, seed=7)
    b = decimate(chunked(pts, 1000), target_count=100, seed=7)
    c = decimate(chunked(pts, 1000), target_count=100, seed=8)
    assert len(a) == 100
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_chunking_does_not_change_the_sample():
    pts = uniform_cloud(10000, seed=4)
    a = decimate(chunked(pts, 137), target_count=250, seed=5)
    b = decimate(chunked(pts, 10000), target_count=250, seed=5)
    assert np.array_equal(a, b)


def test_survivors_keep_input_order():
    pts = uniform_cloud(5000, seed=6)
    out = decimate(chunked(pts, 500), target_count=50, seed=9)
    # recover each survivor's position in the input
    idx = []
    for rec in out:
        hits = np.nonzero((pts["x"] == rec["x"]) & (pts["y"] == rec["y"])
                          & (pts["z"] == rec["z"]))[0]
        assert len(hits) == 1
        idx.append(hits[0])
    assert idx == sorted(idx)


def test_coverage_over_twenty_seeds():
    pts = uniform_cloud(10000, seed=12, lo=0.0, hi=10.0)
    for seed in range(20):
        out = decimate(chunked(pts, 2048), target_count=100, seed=seed)
        assert len(out) == 100
        for axis in ("x", "y", "z"):
            span = out[axis].max() - out[axis].min()
            full = pts[axis].max() - pts[axis].min()
            assert span >= 0.9 * full, (seed, axis)


def test_selection_is_roughly_uniform():
    pts = uniform_cloud(50, seed=13)
    hits_first = 0
    hits_last = 0
    trials = 300
    for seed in range(trials):
        out = decimate(chunked(pts, 17), target_count=10, seed=seed)
        xs = set(out["x"].tolist())
        hits_first += pts["x"][0] in xs
        hits_last += pts["x"][-1] in xs
    for hits in (hits_first, hits_last):
        assert 0.1 <= hits / trials <= 0.35
