"""Per-tick DBSCAN over a uniform grid of cell size ``eps``."""

from __future__ import annotations

from typing import Iterable, List

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .model import Params, SnapshotCluster, TrajectoryPoint

# Half of the 3x3 neighbourhood; the (0, 0) cell is handled separately.
_FORWARD_CELLS = ((1, 0), (-1, 1), (0, 1), (1, 1))


def neighbor_pairs(xy: np.ndarray, eps: float):
    """All index pairs ``(i, j)``, ``i != j`` once each, with distance <= eps."""
    n = len(xy)
    if n < 2:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty
    cells = np.floor(xy / eps).astype(np.int64)
    cells -= cells.min(axis=0)
    span = int(cells[:, 1].max()) + 3
    keys = (cells[:, 0] + 1) * span + (cells[:, 1] + 1)
    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]

    left, right = [], []
    for dx, dy in ((0, 0),) + _FORWARD_CELLS:
        target = sorted_keys + dx * span + dy
        lo = np.searchsorted(sorted_keys, target, side="left")
        hi = np.searchsorted(sorted_keys, target, side="right")
        if dx == 0 and dy == 0:
            lo = np.arange(n) + 1  # only later points of the same cell
        counts = np.maximum(hi - lo, 0)
        total = int(counts.sum())
        if total == 0:
            continue
        src = np.repeat(np.arange(n), counts)
        starts = np.repeat(lo, counts)
        offsets = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
        dst = starts + offsets
        left.append(order[src])
        right.append(order[dst])
    if not left:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty
    i = np.concatenate(left)
    j = np.concatenate(right)
    delta = xy[i] - xy[j]
    keep = np.einsum("ij,ij->i", delta, delta) <= eps * eps
    return i[keep], j[keep]


def dbscan_labels(xy: np.ndarray, eps: float, min_pts: int, rank: np.ndarray) -> np.ndarray:
    """DBSCAN labels (-1 for noise) for points ``xy``.

    A point is core when its closed eps-neighbourhood, itself included, holds
    at least ``min_pts`` points. A border point joins the cluster of its
    neighbouring core point with the smallest ``rank``.
    """
    n = len(xy)
    labels = np.full(n, -1, dtype=np.int64)
    if n == 0:
        return labels
    i, j = neighbor_pairs(xy, eps)
    degree = np.bincount(np.concatenate([i, j]), minlength=n) + 1
    core = degree >= min_pts
    if not core.any():
        return labels

    both = core[i] & core[j]
    graph = coo_matrix((np.ones(int(both.sum())), (i[both], j[both])), shape=(n, n))
    _, comp = connected_components(graph, directed=False)
    labels[core] = comp[core]

    # border candidates: (border point, core neighbour) in both directions
    b_pts = np.concatenate([i[core[j] & ~core[i]], j[core[i] & ~core[j]]])
    b_core = np.concatenate([j[core[j] & ~core[i]], i[core[i] & ~core[j]]])
    if len(b_pts):
        order = np.lexsort((rank[b_core], b_pts))
        b_pts, b_core = b_pts[order], b_core[order]
        first = np.ones(len(b_pts), dtype=bool)
        first[1:] = b_pts[1:] != b_pts[:-1]
        labels[b_pts[first]] = comp[b_core[first]]
    return labels


def cluster_snapshot(points: Iterable[TrajectoryPoint], p: Params) -> List[SnapshotCluster]:
    """Snapshot clusters at one tick, noise and clusters below ``m_c`` dropped.

    Cluster ids are assigned in order of each cluster's smallest object id,
    so the output does not depend on input order.
    """
    pts = list(points)
    if not pts:
        return []
    t = pts[0].t
    if any(q.t != t for q in pts):
        raise ValueError("points span more than one timestamp")
    pts.sort(key=lambda q: q.object_id)
    ids = [q.object_id for q in pts]
    xy = np.array([(q.x, q.y) for q in pts], dtype=float)
    labels = dbscan_labels(xy, p.eps, p.min_pts, np.arange(len(pts)))

    groups = {}
    for idx in np.flatnonzero(labels >= 0):
        groups.setdefault(int(labels[idx]), []).append(int(idx))
    # members are in ascending id order, so members[0] is the smallest id
    kept = sorted((m for m in groups.values() if len(m) >= p.m_c), key=lambda m: m[0])
    return [
        SnapshotCluster.from_points(k, t, [ids[i] for i in m], xy[m])
        for k, m in enumerate(kept)
    ]
