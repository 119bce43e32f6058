"""Domain types shared by every stage of the pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Hashable, Tuple

import numpy as np

ObjectId = Hashable
# (timestamp, per-tick cluster index); orders clusters by time first.
ClusterKey = Tuple[int, int]


class ParamError(ValueError):
    """Raised when a parameter bundle violates its constraints."""


@dataclass(frozen=True)
class TrajectoryPoint:
    object_id: ObjectId
    t: int
    x: float
    y: float


@dataclass(frozen=True, eq=False)
class SnapshotCluster:
    """A density-connected set of objects at one timestamp.

    ``points`` holds the member coordinates in the order of ``sorted(members)``
    and is kept for exact Hausdorff computations.
    """

    cluster_id: int
    t: int
    members: frozenset
    center: Tuple[float, float]
    radius: float
    points: np.ndarray = field(repr=False)

    @classmethod
    def from_points(cls, cluster_id: int, t: int, members, coords) -> "SnapshotCluster":
        """Build a cluster, computing its mean center and max radius."""
        members = list(members)
        coords = np.asarray(coords, dtype=float).reshape(-1, 2)
        if len(members) != len(coords):
            raise ValueError("members and coords differ in length")
        if not members:
            raise ValueError("empty cluster")
        order = sorted(range(len(members)), key=lambda i: members[i])
        pts = np.ascontiguousarray(coords[order])
        pts.setflags(write=False)
        cx, cy = pts.mean(axis=0)
        radius = float(np.sqrt(((pts - (cx, cy)) ** 2).sum(axis=1)).max())
        return cls(cluster_id, int(t), frozenset(members), (float(cx), float(cy)), radius, pts)

    @property
    def key(self) -> ClusterKey:
        return (self.t, self.cluster_id)

    @property
    def size(self) -> int:
        return len(self.members)

    def __eq__(self, other):
        if not isinstance(other, SnapshotCluster):
            return NotImplemented
        return (
            self.key == other.key
            and self.members == other.members
            and self.center == other.center
            and self.radius == other.radius
            and np.array_equal(self.points, other.points)
        )

    def __hash__(self):
        return hash((self.key, self.members))


@dataclass(frozen=True)
class Params:
    """Thresholds for crowds, aggregations, evolving groups and DBSCAN.

    ``d`` is meters per tick; ``m_g`` is a fraction in (0, 1].
    """

    w: int
    k_c: int
    m_c: int
    d: float
    k_p: int
    m_p: int
    m_g: float
    k_g: int
    eps: float
    min_pts: int

    @property
    def max_gap(self) -> int:
        """Largest tick gap between adjacent clusters of any crowd."""
        return self.w - self.k_c + 1

    def replace(self, **changes) -> "Params":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return Params(**values)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def validate_params(p: Params) -> Params:
    """Return ``p`` unchanged, or raise ParamError naming the first violation."""
    checks = [
        (p.w >= 1, "w must be at least 1"),
        (p.k_c >= 1, "k_c must be at least 1"),
        (p.k_c <= p.w, "k_c exceeds w"),
        (p.m_c >= 1, "m_c must be at least 1"),
        (p.d >= 0, "d must be non-negative"),
        (p.k_p >= 1, "k_p must be at least 1"),
        (p.k_p <= p.k_c, "k_p exceeds k_c"),
        (p.m_p >= 1, "m_p must be at least 1"),
        (p.m_p <= p.m_c, "m_p exceeds m_c"),
        (0 < p.m_g <= 1, "m_g out of range"),
        (p.k_g >= 1, "k_g must be at least 1"),
        (p.eps > 0, "eps must be positive"),
        (p.min_pts >= 1, "min_pts must be at least 1"),
    ]
    for ok, message in checks:
        if not ok:
            raise ParamError(message)
    return p


@dataclass(frozen=True, order=True)
class Window:
    start: int
    end: int

    @property
    def length(self) -> int:
        return self.end - self.start + 1

    def __contains__(self, t: int) -> bool:
        return self.start <= t <= self.end


def window_at(t: int, w: int, origin: int = 0) -> Window:
    """The window ending at tick ``t``; grows from ``origin`` during warm-up."""
    return Window(max(origin, t - w + 1), t)


def format_key(key: ClusterKey) -> str:
    return f"{key[0]}:{key[1]}"


def parse_key(text: str) -> ClusterKey:
    t, _, idx = text.partition(":")
    return (int(t), int(idx))


# Defaults sized for planar meters and one tick per sampling step.
DEFAULT_PARAMS = Params(w=8, k_c=6, m_c=4, d=10.0, k_p=5, m_p=3, m_g=0.5, k_g=3,
                        eps=5.0, min_pts=3)
