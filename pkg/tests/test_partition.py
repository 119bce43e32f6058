import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from evogroup.partition import (FIRST, SECOND, bucket_disks, build_partition, ring_layout)


def circle(n, r=10.0):
    return [(r * math.cos(2 * math.pi * (i + 0.5) / n), r * math.sin(2 * math.pi * (i + 0.5) / n))
            for i in range(n)]


def test_layout():
    assert ring_layout(1) == [1]
    assert ring_layout(4) == [4]
    assert ring_layout(8) == [4, 4]
    assert ring_layout(9) == [4, 5]
    assert sum(ring_layout(50)) == 50


def test_single_worker_covers_everything():
    part = build_partition(circle(5), 1, d=1.0)
    assert len(part) == 1
    assert part.classify((1e6, -1e6), 3.0) == (FIRST, {0})


def test_circle_splits_evenly():
    part = build_partition(circle(8), 4, d=0.1)
    counts = np.bincount(part.locate(circle(8)), minlength=4)
    assert counts.tolist() == [2, 2, 2, 2]


def test_balance_random_layout():
    rng = np.random.default_rng(0)
    pts = rng.normal(0, 100, size=(100, 2))
    for workers in (2, 4, 8):
        counts = np.bincount(build_partition(pts, workers, d=1.0).locate(pts), minlength=workers)
        assert counts.max() <= 2 * counts.min()


def test_classify_centroid_and_straddle():
    part = build_partition(circle(8), 4, d=0.5)
    kind, cov = part.classify(circle(8)[0], 0.01)
    assert kind == FIRST and len(cov) == 1
    # on the x axis, between two clusters of different sectors
    pts = circle(8)
    mid = ((pts[1][0] + pts[2][0]) / 2, (pts[1][1] + pts[2][1]) / 2)
    kind, cov = part.classify(mid, 0.01)
    assert kind == SECOND and len(cov) == 2


def brute_region_distance(part, point, k, samples=4000):
    """Distance to region k by dense sampling of its locate() membership."""
    rng = np.random.default_rng(1)
    pts = np.asarray(point) + rng.normal(0, 1, size=(samples, 2)) * rng.uniform(0, 60, (samples, 1))
    inside = part.locate(pts) == k
    if not inside.any():
        return math.inf
    return float(np.hypot(*(pts[inside] - point).T).min())


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 9))
def test_distance_is_a_lower_bound_and_zero_inside(seed, workers):
    rng = np.random.default_rng(seed)
    centers = rng.normal(0, 20, size=(30, 2))
    part = build_partition(centers, workers, d=1.0)
    q = rng.normal(0, 30, size=2)
    dist = part.distances([q])[0]
    home = int(part.locate([q])[0])
    assert dist[home] == pytest.approx(0.0, abs=1e-9)
    for k in range(len(part)):
        assert dist[k] <= brute_region_distance(part, q, k) + 1e-9


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 9))
def test_points_near_a_disk_land_in_covered_regions(seed, workers):
    """Soundness of the cover: any point within r + D of a center is in a covered region."""
    rng = np.random.default_rng(seed)
    centers = rng.normal(0, 20, size=(25, 2))
    part = build_partition(centers, workers, d=2.0, dt_max=2)
    c = rng.normal(0, 20, size=2)
    r = float(rng.uniform(0, 5))
    cov = set(part.covered([c], [r])[0].tolist())
    ang = rng.uniform(0, 2 * math.pi, 500)
    rad = (r + part.zone) * np.sqrt(rng.uniform(0, 1, 500))
    probe = c + np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
    assert set(part.locate(probe).tolist()) <= cov


def test_buckets_hold_every_disk():
    rng = np.random.default_rng(2)
    part = build_partition(rng.normal(0, 10, (20, 2)), 6, d=1.0)
    centers = rng.normal(0, 10, (40, 2))
    buckets = bucket_disks(part, centers, rng.uniform(0, 2, 40))
    seen = set(np.concatenate(buckets).tolist())
    assert seen == set(range(40))
    home = part.locate(centers)
    for i, k in enumerate(home):
        assert i in buckets[k]
