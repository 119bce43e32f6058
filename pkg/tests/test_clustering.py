import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from evogroup.clustering import cluster_snapshot, dbscan_labels, neighbor_pairs
from evogroup.model import DEFAULT_PARAMS, TrajectoryPoint


def brute_dbscan(xy, eps, min_pts):
    n = len(xy)
    dist = np.hypot(*(xy[:, None, :] - xy[None, :, :]).transpose(2, 0, 1))
    nb = dist <= eps
    core = nb.sum(axis=1) >= min_pts
    labels = -np.ones(n, dtype=int)
    comp = 0
    for i in range(n):
        if core[i] and labels[i] < 0:
            stack = [i]
            labels[i] = comp
            while stack:
                u = stack.pop()
                for v in np.flatnonzero(nb[u] & core):
                    if labels[v] < 0:
                        labels[v] = comp
                        stack.append(v)
            comp += 1
    for i in range(n):
        if not core[i]:
            cores = np.flatnonzero(nb[i] & core)
            if len(cores):
                labels[i] = labels[cores.min()]
    return labels


def same_partition(a, b):
    mapping = {}
    for x, y in zip(a, b):
        if (x < 0) != (y < 0):
            return False
        if x >= 0 and mapping.setdefault(x, y) != y:
            return False
    return len(set(mapping.values())) == len(mapping)


def test_neighbor_pairs_small():
    xy = np.array([[0, 0], [0.5, 0], [3, 0], [3.9, 0.1]], dtype=float)
    i, j = neighbor_pairs(xy, 1.0)
    pairs = {tuple(sorted(p)) for p in zip(i.tolist(), j.tolist())}
    assert pairs == {(0, 1), (2, 3)}


@settings(max_examples=150, deadline=None)
@given(st.lists(st.tuples(st.floats(-20, 20), st.floats(-20, 20)), min_size=0, max_size=40),
       st.floats(0.3, 6.0), st.integers(1, 5))
def test_dbscan_matches_brute_force(pts, eps, min_pts):
    xy = np.array(pts, dtype=float).reshape(-1, 2)
    got = dbscan_labels(xy, eps, min_pts, np.arange(len(xy)))
    assert same_partition(got, brute_dbscan(xy, eps, min_pts))


def test_snapshot_ids_and_filtering():
    p = DEFAULT_PARAMS.replace(eps=1.0, min_pts=2, m_c=3)
    pts = [TrajectoryPoint(o, 4, x, 0.0) for o, x in
           [("b", 0.0), ("a", 0.5), ("c", 1.0), ("z", 50.0), ("y", 50.5), ("q", 99.0)]]
    clusters = cluster_snapshot(pts, p)
    assert len(clusters) == 1  # {y, z} is too small, q is noise
    assert clusters[0].members == {"a", "b", "c"} and clusters[0].t == 4
    assert clusters[0].cluster_id == 0


def test_order_independent():
    rng = np.random.default_rng(3)
    p = DEFAULT_PARAMS.replace(eps=2.0, min_pts=3, m_c=3)
    pts = [TrajectoryPoint(f"o{i}", 0, *rng.uniform(0, 30, 2)) for i in range(80)]
    a = cluster_snapshot(pts, p)
    b = cluster_snapshot(list(reversed(pts)), p)
    assert a == b


def test_mixed_ticks_rejected():
    with pytest.raises(ValueError):
        cluster_snapshot([TrajectoryPoint("a", 0, 0, 0), TrajectoryPoint("b", 1, 0, 0)],
                         DEFAULT_PARAMS)
