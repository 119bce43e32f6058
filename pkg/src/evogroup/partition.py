"""Sector-based partitioning of the plane around a pole.

The plane is split into rings by radius and every ring into angular
sectors, with boundaries at midpoints between sorted cluster radii and
angles so partitions carry near-equal cluster counts. Regions are closed
annular sectors; together they tile the plane.

A cluster disk of radius ``r`` is said to cover region ``k`` when the
center lies within ``r + D`` of it, ``D`` being the zone half-width. If a
new cluster ``c`` and an ending cluster ``e`` satisfy ``H(c, e) <= D``,
then any member point of ``e`` lies within ``D`` of a point of ``c``, so
the region holding that point is both touched by ``e``'s disk and covered
by ``c``. Scanning only the ending clusters bucketed into covered regions
therefore skips no link.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

TWO_PI = 2.0 * math.pi
FIRST = "first"
SECOND = "second"


def ring_layout(num_partitions: int) -> List[int]:
    """Sectors per ring, inner ring first; extra sectors go to outer rings."""
    if num_partitions < 8:
        rings = 1
    else:
        rings = int(math.sqrt(num_partitions / 2))
    base, extra = divmod(num_partitions, rings)
    return [base + (1 if i >= rings - extra else 0) for i in range(rings)]


def _split_points(n: int, parts: int) -> List[int]:
    """Indices splitting ``n`` sorted items into ``parts`` near-equal runs."""
    return [round(k * n / parts) for k in range(parts + 1)]


@dataclass
class SectorPartition:
    pole: Tuple[float, float]
    ring_edges: np.ndarray  # inner radius of every ring; ring_edges[0] == 0
    sector_edges: List[np.ndarray]  # per ring: ascending start angles, span < start + 2pi
    zone: float = 0.0  # half-width D of boundary and ring zones
    offsets: List[int] = field(default_factory=list)

    def __post_init__(self):
        if not self.offsets:
            acc, offs = 0, []
            for edges in self.sector_edges:
                offs.append(acc)
                acc += len(edges)
            self.offsets = offs
        # flat per-region description
        rin, rout, a, span = [], [], [], []
        outer = list(self.ring_edges[1:]) + [math.inf]
        for ring, edges in enumerate(self.sector_edges):
            s = len(edges)
            for k in range(s):
                rin.append(self.ring_edges[ring])
                rout.append(outer[ring])
                a.append(edges[k])
                if s == 1:
                    span.append(TWO_PI)
                else:
                    nxt = edges[k + 1] if k + 1 < s else edges[0] + TWO_PI
                    span.append(nxt - edges[k])
        self._rin = np.array(rin)
        self._rout = np.array(rout)
        self._a = np.array(a)
        self._span = np.array(span)

    @property
    def boundary_width(self) -> float:
        return 2.0 * self.zone

    @property
    def ring_zone_width(self) -> float:
        return 2.0 * self.zone

    def __len__(self) -> int:
        return len(self._a)

    def _polar(self, pts: np.ndarray):
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        rel = pts - np.asarray(self.pole)
        rho = np.hypot(rel[:, 0], rel[:, 1])
        phi = np.arctan2(rel[:, 1], rel[:, 0])
        return rel, rho, phi

    def locate(self, pts) -> np.ndarray:
        """Partition index holding each point (ties go to the later edge)."""
        _, rho, phi = self._polar(pts)
        ring = np.searchsorted(self.ring_edges, rho, side="right") - 1
        out = np.empty(len(rho), dtype=np.int64)
        for r, edges in enumerate(self.sector_edges):
            sel = ring == r
            if not sel.any():
                continue
            if len(edges) == 1:
                out[sel] = self.offsets[r]
                continue
            rel_phi = np.mod(phi[sel] - edges[0], TWO_PI) + edges[0]
            k = np.searchsorted(edges, rel_phi, side="right") - 1
            out[sel] = self.offsets[r] + np.clip(k, 0, len(edges) - 1)
        return out

    def distances(self, pts) -> np.ndarray:
        """Exact Euclidean distance of each point to each region, shape (n, P)."""
        rel, rho, phi = self._polar(pts)
        rho = rho[:, None]
        rin, rout = self._rin[None, :], self._rout[None, :]
        # angular position relative to the region's start edge
        off = np.mod(phi[:, None] - self._a[None, :], TWO_PI)
        inside = (off <= self._span[None, :]) | (self._span[None, :] >= TWO_PI)
        radial = np.maximum(np.maximum(rin - rho, rho - rout), 0.0)

        def to_edge(angle):
            ux, uy = np.cos(angle), np.sin(angle)
            proj = rel[:, 0:1] * ux + rel[:, 1:2] * uy
            s = np.clip(proj, rin, rout)
            dx = rel[:, 0:1] - s * ux
            dy = rel[:, 1:2] - s * uy
            return np.hypot(dx, dy)

        with np.errstate(invalid="ignore"):
            edge = np.minimum(to_edge(self._a[None, :]), to_edge((self._a + self._span)[None, :]))
        return np.where(inside, radial, edge)

    def covered(self, centers, radii, zone: Optional[float] = None) -> List[np.ndarray]:
        """Regions within ``radius + zone`` of each center."""
        zone = self.zone if zone is None else zone
        dist = self.distances(centers)
        reach = np.asarray(radii, dtype=float)[:, None] + zone
        reach = reach + 1e-9 * (1.0 + reach)
        hit = dist <= reach
        return [np.flatnonzero(row) for row in hit]

    def classify(self, center, radius: float, zone: Optional[float] = None):
        """(FIRST or SECOND, set of covered regions) for one cluster disk."""
        cov = self.covered([center], [radius], zone)[0]
        kind = FIRST if len(cov) == 1 else SECOND
        return kind, set(int(k) for k in cov)


def _angle_edges(phi: np.ndarray, parts: int) -> np.ndarray:
    if parts == 1:
        return np.array([-math.pi])
    n = len(phi)
    if n < parts:
        start = (phi.min() if n else 0.0) - math.pi / parts
        return start + TWO_PI / parts * np.arange(parts)
    phi = np.sort(phi)
    ext = np.concatenate([phi, phi[:1] + TWO_PI])
    edges = []
    for idx in _split_points(n, parts)[:-1]:
        if idx == 0:
            edges.append((phi[-1] - TWO_PI + phi[0]) / 2.0)
        else:
            edges.append((ext[idx - 1] + ext[idx]) / 2.0)
    return np.array(edges)


def build_partition(centers, num_workers: int, d: float, dt_max: float = 1.0) -> SectorPartition:
    """Balanced sector partition of cluster centers for ``num_workers``."""
    if num_workers < 1:
        raise ValueError("num_workers must be at least 1")
    pts = np.asarray(centers, dtype=float).reshape(-1, 2)
    zone = d * dt_max
    pole = tuple(pts.mean(axis=0)) if len(pts) else (0.0, 0.0)
    if num_workers == 1 or len(pts) == 0:
        return SectorPartition((float(pole[0]), float(pole[1])), np.array([0.0]),
                               [np.array([-math.pi])], zone)
    layout = ring_layout(num_workers)
    rel = pts - np.asarray(pole)
    rho = np.hypot(rel[:, 0], rel[:, 1])
    phi = np.arctan2(rel[:, 1], rel[:, 0])
    order = np.argsort(rho, kind="stable")
    n = len(pts)
    # ring cut points proportional to the sectors each ring will hold
    cum = np.concatenate([[0], np.cumsum(layout)])
    cuts = [round(c * n / num_workers) for c in cum]
    ring_edges = [0.0]
    for c in cuts[1:-1]:
        if 0 < c < n:
            ring_edges.append((rho[order[c - 1]] + rho[order[c]]) / 2.0)
        else:
            ring_edges.append(ring_edges[-1] if c == 0 else rho[order[-1]] + 1.0)
    ring_edges = np.maximum.accumulate(np.array(ring_edges))
    sectors = []
    for r, parts in enumerate(layout):
        members = order[cuts[r]:cuts[r + 1]]
        sectors.append(_angle_edges(phi[members], parts))
    return SectorPartition((float(pole[0]), float(pole[1])), ring_edges, sectors, zone)


def bucket_disks(partition: SectorPartition, centers, radii) -> List[np.ndarray]:
    """For each region, indices of the disks that touch it."""
    pts = np.asarray(centers, dtype=float).reshape(-1, 2)
    radii = np.asarray(radii, dtype=float)
    buckets: List[List[int]] = [[] for _ in range(len(partition))]
    if len(pts):
        for i, regions in enumerate(partition.covered(pts, radii, zone=0.0)):
            for k in regions:
                buckets[k].append(i)
    return [np.array(b, dtype=np.int64) for b in buckets]
