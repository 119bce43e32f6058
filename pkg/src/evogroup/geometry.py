"""Hausdorff distance between snapshot clusters and the pruned link test.

Two center/radius bounds decide most pairs without touching the member
points:

* far: ``|m1 - m2| > r1 + r2 + d*dt`` implies ``H > d*dt``;
* near: ``|m1 - m2| <= d*dt - (r1 + r2)`` implies ``H <= d*dt``.

The near bound subtracts ``r1 + r2``; subtracting only ``max(r1, r2)`` is
not sound (two crossed point pairs sharing a center are a counterexample).
Both bounds carry a small relative slack so that floating-point ties always
fall through to the exact computation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import SnapshotCluster

_SLACK = 1e-9

FAR = "far"
NEAR = "near"
EXACT = "exact"


def _as_points(c) -> np.ndarray:
    pts = c.points if isinstance(c, SnapshotCluster) else c
    return np.asarray(pts, dtype=float).reshape(-1, 2)


def hausdorff(c1, c2) -> float:
    """Exact symmetric Hausdorff distance between two point sets.

    Accepts SnapshotCluster instances or (n, 2) arrays.
    """
    a = _as_points(c1)
    b = _as_points(c2)
    if len(a) == 0 or len(b) == 0:
        raise ValueError("empty cluster")
    diff = a[:, None, :] - b[None, :, :]
    sq = np.einsum("ijk,ijk->ij", diff, diff)
    forward = sq.min(axis=1).max()
    backward = sq.min(axis=0).max()
    return float(math.sqrt(max(forward, backward)))


@dataclass(frozen=True)
class LinkDecision:
    linked: bool
    resolved_by: str  # FAR, NEAR or EXACT

    def __bool__(self) -> bool:
        return self.linked


def prune_regime(gap: float, r1: float, r2: float, threshold: float) -> str:
    """Which bound (if any) settles ``H <= threshold`` for this center gap."""
    rsum = r1 + r2
    scale = _SLACK * (1.0 + abs(gap) + rsum + abs(threshold))
    if gap > threshold + rsum + scale:
        return FAR
    if gap + scale <= threshold - rsum:
        return NEAR
    return EXACT


def center_gap(c1: SnapshotCluster, c2: SnapshotCluster) -> float:
    return math.hypot(c1.center[0] - c2.center[0], c1.center[1] - c2.center[1])


def link_test(c1: SnapshotCluster, c2: SnapshotCluster, d: float, dt: int) -> LinkDecision:
    """Decide ``hausdorff(c1, c2) <= d * dt``, pruning by center distance first."""
    if dt < 1:
        raise ValueError("dt must be at least 1")
    threshold = d * dt
    regime = prune_regime(center_gap(c1, c2), c1.radius, c2.radius, threshold)
    if regime == FAR:
        return LinkDecision(False, FAR)
    if regime == NEAR:
        return LinkDecision(True, NEAR)
    return LinkDecision(hausdorff(c1, c2) <= threshold, EXACT)


def exact_link_test(c1: SnapshotCluster, c2: SnapshotCluster, d: float, dt: int) -> bool:
    if dt < 1:
        raise ValueError("dt must be at least 1")
    return hausdorff(c1, c2) <= d * dt
