"""Incremental closed-crowd discovery over a sliding window.

The candidate set is organised by ending cluster. For every live ending
cluster ``e`` it holds exactly the candidates ending at ``e`` that are not
contained in another candidate ending at ``e``. Given that invariant:

* extending every candidate of a linked ending cluster, while skipping
  ending clusters already contained in an extended candidate, yields the
  same invariant for the new clusters;
* truncating expired heads and dropping candidates contained in a same-end
  sibling restores it after the window slides;
* a candidate of length >= k_c is a closed crowd iff its ending cluster has
  no linked successor inside the window.

The last point replaces a per-tick "unmatched in every copy" status: an
ending cluster can be matched at an earlier tick, stay in the window, and
be unmatched now, and its candidates are still not closed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

import numpy as np

from . import geometry
from .model import ClusterKey, Params, SnapshotCluster, Window, format_key

Candidate = Tuple[ClusterKey, ...]
Linker = Callable[[SnapshotCluster, SnapshotCluster, float, int], bool]


class Status(str, enum.Enum):
    UNCHECK = "uncheck"
    MATCH = "match"
    UNMTH = "unmth"


@dataclass(frozen=True, eq=False)
class ClosedCrowd:
    clusters: Tuple[SnapshotCluster, ...]
    window: Window

    @property
    def keys(self) -> Candidate:
        return tuple(c.key for c in self.clusters)

    def __len__(self) -> int:
        return len(self.clusters)

    def __eq__(self, other):
        if not isinstance(other, ClosedCrowd):
            return NotImplemented
        return self.keys == other.keys and self.window == other.window

    def __hash__(self):
        return hash((self.keys, self.window))

    def __repr__(self):
        body = ",".join(format_key(k) for k in self.keys)
        return f"ClosedCrowd(<{body}> in [{self.window.start},{self.window.end}])"


def _last_time_first(key: ClusterKey):
    return (-key[0], key[1])


class CandidateSet:
    """Live crowd candidates grouped by ending cluster."""

    def __init__(self, origin: Optional[int] = None):
        self.origin = origin
        self.clusters: Dict[ClusterKey, SnapshotCluster] = {}
        self.by_end: Dict[ClusterKey, Set[Candidate]] = {}
        # clusters with a linked successor inside the window
        self.extended: Set[ClusterKey] = set()

    def register(self, clusters: Iterable[SnapshotCluster]) -> None:
        for c in clusters:
            self.clusters[c.key] = c

    def end_keys(self) -> List[ClusterKey]:
        return sorted(self.by_end, key=_last_time_first)

    def candidates(self) -> List[Candidate]:
        out = []
        for e in self.end_keys():
            out.extend(sorted(self.by_end[e], key=lambda cand: (-len(cand), cand)))
        return out

    def __len__(self) -> int:
        return sum(len(v) for v in self.by_end.values())

    def __contains__(self, cand) -> bool:
        cand = tuple(cand)
        return bool(cand) and cand in self.by_end.get(cand[-1], ())

    def copy(self) -> "CandidateSet":
        other = CandidateSet(self.origin)
        other.clusters = dict(self.clusters)
        other.by_end = {e: set(v) for e, v in self.by_end.items()}
        other.extended = set(self.extended)
        return other

    def add(self, cand: Candidate) -> None:
        self.by_end.setdefault(cand[-1], set()).add(cand)


def _maximal(cands: Iterable[Candidate]) -> Set[Candidate]:
    """Drop candidates contained (as cluster sets) in another one."""
    kept: List[Tuple[Candidate, frozenset]] = []
    for cand in sorted(set(cands), key=len, reverse=True):
        s = frozenset(cand)
        if not any(s < other for _, other in kept):
            kept.append((cand, s))
    return {cand for cand, _ in kept}


def expire(cs: CandidateSet, expired_t: int, p: Optional[Params] = None,
           window: Optional[Window] = None) -> CandidateSet:
    """Remove every cluster at ``expired_t`` (the oldest tick) in place."""
    gone = [k for k in cs.clusters if k[0] == expired_t]
    if not gone:
        return cs
    for k in gone:
        del cs.clusters[k]
        cs.extended.discard(k)
    for e in list(cs.by_end):
        if e[0] == expired_t:
            del cs.by_end[e]
            continue
        group = cs.by_end[e]
        if any(cand[0][0] == expired_t for cand in group):
            trimmed = (cand[1:] if cand[0][0] == expired_t else cand for cand in group)
            cs.by_end[e] = _maximal(trimmed)
    return cs


def prune_stale(cs: CandidateSet, t_now: int, p: Params) -> List[ClusterKey]:
    """Drop ending clusters too old to be linked into any future crowd."""
    stale = [e for e in cs.by_end if t_now - e[0] > p.w - p.k_c]
    for e in stale:
        del cs.by_end[e]
    return stale


@dataclass
class EndTable:
    """Read-only snapshot of the ending clusters taken before a tick."""

    keys: List[ClusterKey]
    clusters: List[SnapshotCluster]
    t: np.ndarray
    centers: np.ndarray
    radii: np.ndarray
    # marks[i]: indices of ending clusters occurring in candidates ending at i
    marks: List[np.ndarray]

    @classmethod
    def from_candidates(cls, cs: CandidateSet) -> "EndTable":
        keys = cs.end_keys()
        return cls.build(keys, [cs.clusters[k] for k in keys],
                         [cs.by_end[k] for k in keys])

    @classmethod
    def build(cls, keys, clusters, groups) -> "EndTable":
        index = {k: i for i, k in enumerate(keys)}
        marks = []
        for group in groups:
            members = {index[k] for cand in group for k in cand if k in index}
            marks.append(np.fromiter(sorted(members), dtype=np.int64, count=len(members)))
        n = len(keys)
        centers = np.array([c.center for c in clusters], dtype=float).reshape(n, 2)
        return cls(
            keys=list(keys),
            clusters=list(clusters),
            t=np.array([k[0] for k in keys], dtype=np.int64),
            centers=centers,
            radii=np.array([c.radius for c in clusters], dtype=float),
            marks=marks,
        )

    def __len__(self) -> int:
        return len(self.keys)


@dataclass
class ScanOutcome:
    cluster: ClusterKey
    linked: List[int]
    status: Optional[Dict[ClusterKey, Status]] = None
    stats: Dict[str, int] = field(default_factory=dict)


def scan_cluster(c: SnapshotCluster, table: EndTable, d: float,
                 view: Optional[Sequence[int]] = None,
                 linker: Optional[Linker] = None,
                 trace: bool = False) -> ScanOutcome:
    """Match one new cluster against the pre-tick ending clusters.

    Ending clusters are visited last-time-first. Once a candidate set of an
    ending cluster is extended, every ending cluster occurring in those
    candidates is marked and skipped. ``view`` restricts the scan to a
    subset of table indices (kept in table order).
    """
    idx = np.arange(len(table)) if view is None else np.sort(np.asarray(view, dtype=np.int64))
    stats = {FAR_KEY: 0, NEAR_KEY: 0, EXACT_KEY: 0, "skipped": 0}
    linked: List[int] = []
    status = {table.keys[i]: Status.UNCHECK for i in idx} if trace else None
    if len(idx) == 0:
        return ScanOutcome(c.key, linked, status, stats)

    dts = c.t - table.t[idx]
    if linker is None:
        thr = d * dts
        delta = table.centers[idx] - np.asarray(c.center)
        gap = np.sqrt(np.einsum("ij,ij->i", delta, delta))
        rsum = table.radii[idx] + c.radius
        scale = 1e-9 * (1.0 + gap + rsum + thr)
        far = gap > thr + rsum + scale
        near = gap + scale <= thr - rsum

    marked = np.zeros(len(table), dtype=bool)
    for pos, i in enumerate(idx):
        if marked[i]:
            stats["skipped"] += 1
            if trace:
                status[table.keys[i]] = Status.MATCH
            continue
        if linker is not None:
            ok = bool(linker(c, table.clusters[i], d, int(dts[pos])))
            stats[EXACT_KEY] += 1
        elif far[pos]:
            ok = False
            stats[FAR_KEY] += 1
        elif near[pos]:
            ok = True
            stats[NEAR_KEY] += 1
        else:
            ok = geometry.hausdorff(c, table.clusters[i]) <= thr[pos]
            stats[EXACT_KEY] += 1
        if ok:
            linked.append(int(i))
            marked[table.marks[i]] = True
            marked[i] = True
        if trace:
            status[table.keys[i]] = Status.MATCH if ok else Status.UNMTH
    return ScanOutcome(c.key, linked, status, stats)


FAR_KEY = "rule_far"
NEAR_KEY = "rule_near"
EXACT_KEY = "exact"


def apply_scan(cs: CandidateSet, c: SnapshotCluster, outcome: ScanOutcome,
               table: EndTable) -> List[Candidate]:
    """Insert the extensions found by ``outcome`` into the live set."""
    new = []
    for i in outcome.linked:
        e = table.keys[i]
        for cand in cs.by_end.get(e, ()):
            cs.extended.update(cand)
            new.append(cand + (c.key,))
    if not new:
        new.append((c.key,))
    group = cs.by_end.setdefault(c.key, set())
    group.update(new)
    return new


def emit_closed(cs: CandidateSet, t_now: int, p: Params, window: Window) -> List[ClosedCrowd]:
    out = []
    for e, group in cs.by_end.items():
        if e in cs.extended:
            continue
        for cand in group:
            if len(cand) >= p.k_c:
                out.append(ClosedCrowd(tuple(cs.clusters[k] for k in cand), window))
    out.sort(key=lambda cr: cr.keys)
    return out


@dataclass
class TickTrace:
    """Intermediate state of one tick, for inspection and golden tests."""

    after_expiry: List[Candidate] = field(default_factory=list)
    status: Dict[ClusterKey, Dict[ClusterKey, Status]] = field(default_factory=dict)
    after_update: List[Candidate] = field(default_factory=list)
    pruned: List[ClusterKey] = field(default_factory=list)
    after_prune: List[Candidate] = field(default_factory=list)
    stats: Dict[str, int] = field(default_factory=dict)


def incre_update(cs: CandidateSet, new_clusters: Sequence[SnapshotCluster], p: Params,
                 window: Window, linker: Optional[Linker] = None, prune: bool = True,
                 trace: Optional[TickTrace] = None) -> Tuple[CandidateSet, List[ClosedCrowd]]:
    """Process the clusters of tick ``window.end``; ``cs`` is updated in place.

    ``cs`` must already be expired for ``window``. Stale ending clusters are
    pruned after emission when ``prune`` is set and the window has slid past
    the stream origin.
    """
    t_now = window.end
    if cs.origin is None:
        cs.origin = window.start
    new_clusters = sorted(new_clusters, key=lambda c: c.key)
    if any(c.t != t_now for c in new_clusters):
        raise ValueError("new clusters must lie at the window end")
    table = EndTable.from_candidates(cs)
    outcomes = [scan_cluster(c, table, p.d, linker=linker, trace=trace is not None)
                for c in new_clusters]
    cs.register(new_clusters)
    for c, outcome in zip(new_clusters, outcomes):
        apply_scan(cs, c, outcome, table)
    closed = emit_closed(cs, t_now, p, window)
    finish_tick(cs, t_now, p, window, prune, trace, outcomes)
    return cs, closed


def finish_tick(cs: CandidateSet, t_now: int, p: Params, window: Window, prune: bool,
                trace: Optional[TickTrace], outcomes: Sequence[ScanOutcome]) -> List[ClusterKey]:
    """Record the trace and prune stale ending clusters once the window slides."""
    if trace is not None:
        trace.after_update = cs.candidates()
        trace.status = {o.cluster: o.status for o in outcomes if o.status is not None}
        for o in outcomes:
            for k, v in o.stats.items():
                trace.stats[k] = trace.stats.get(k, 0) + v
    pruned: List[ClusterKey] = []
    if prune and window.start > cs.origin:
        pruned = prune_stale(cs, t_now, p)
    if trace is not None:
        trace.pruned = sorted(pruned, key=_last_time_first)
        trace.after_prune = cs.candidates()
    return pruned


class CrowdMiner:
    """Stateful driver for ``expire`` + ``incre_update`` over a tick stream."""

    def __init__(self, params: Params, linker: Optional[Linker] = None, prune: bool = True):
        self.params = params
        self.linker = linker
        self.prune = prune
        self.cs = CandidateSet()
        self.t: Optional[int] = None

    def window_for(self, t: int) -> Window:
        origin = t if self.cs.origin is None else self.cs.origin
        return Window(max(origin, t - self.params.w + 1), t)

    def step(self, t: int, clusters: Sequence[SnapshotCluster],
             trace: Optional[TickTrace] = None) -> List[ClosedCrowd]:
        if self.t is not None and t != self.t + 1:
            raise ValueError(f"expected tick {self.t + 1}, got {t}")
        window = self.window_for(t)
        if self.cs.origin is None:
            self.cs.origin = t
        if window.start > self.cs.origin:
            expire(self.cs, window.start - 1, self.params, window)
        if trace is not None:
            trace.after_expiry = self.cs.candidates()
        self.t = t
        _, closed = incre_update(self.cs, clusters, self.params, window,
                                 linker=self.linker, prune=self.prune, trace=trace)
        return closed
