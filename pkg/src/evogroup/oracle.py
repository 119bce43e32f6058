"""Brute-force references for closed crowds and closed aggregations.

Slow by design and guarded against large inputs; used to check the
incremental miners.
"""

from __future__ import annotations

from itertools import combinations
from typing import Dict, List, Mapping, Optional, Sequence, Set, Tuple

from . import geometry
from .aggregation import Aggregation
from .crowds import ClosedCrowd
from .model import Params, SnapshotCluster, Window

MAX_TICKS = 8
MAX_CLUSTERS_PER_TICK = 10
MAX_CROWD = 10


class OracleSizeError(ValueError):
    """Instance too large for exhaustive enumeration."""


def _default_link(a: SnapshotCluster, b: SnapshotCluster, d: float, dt: int) -> bool:
    return geometry.exact_link_test(a, b, d, dt)


def brute_force_closed_crowds(clusters_by_tick: Mapping[int, Sequence[SnapshotCluster]],
                              p: Params, window: Optional[Window] = None,
                              linker=None) -> Set[ClosedCrowd]:
    """Every maximal crowd among the clusters of one window."""
    link = linker or _default_link
    ticks = sorted(clusters_by_tick)
    if window is None:
        window = Window(ticks[0], ticks[-1]) if ticks else Window(0, 0)
    ticks = [t for t in ticks if t in window]
    if window.length > MAX_TICKS:
        raise OracleSizeError("window longer than %d ticks" % MAX_TICKS)
    clusters = []
    for t in ticks:
        cs = [c for c in clusters_by_tick[t] if c.size >= p.m_c]
        if len(cs) > MAX_CLUSTERS_PER_TICK:
            raise OracleSizeError("more than %d clusters at one tick" % MAX_CLUSTERS_PER_TICK)
        clusters.extend(sorted(cs, key=lambda c: c.key))

    succ: Dict[int, List[int]] = {i: [] for i in range(len(clusters))}
    for i, a in enumerate(clusters):
        for j, b in enumerate(clusters):
            if b.t > a.t and link(b, a, p.d, b.t - a.t):
                succ[i].append(j)

    crowds: List[Tuple[int, ...]] = []
    stack = [(i,) for i in range(len(clusters))]
    while stack:
        path = stack.pop()
        if len(path) >= p.k_c:
            crowds.append(path)
        for j in succ[path[-1]]:
            stack.append(path + (j,))

    crowds.sort(key=len, reverse=True)
    kept: List[frozenset] = []
    out = set()
    for path in crowds:
        s = frozenset(path)
        if any(s < other for other in kept):
            continue
        kept.append(s)
        out.add(ClosedCrowd(tuple(clusters[i] for i in path), window))
    return out


def fixpoint_aggregation(clusters: Sequence[SnapshotCluster], p: Params):
    """Simultaneous-removal fixpoint from scratch; (clusters, group) or None."""
    kept = list(clusters)
    while len(kept) >= p.k_c:
        counts: Dict[object, int] = {}
        for c in kept:
            for o in c.members:
                counts[o] = counts.get(o, 0) + 1
        par = frozenset(o for o, n in counts.items() if n >= p.k_p)
        bad = [c for c in kept if len(c.members & par) < p.m_p]
        if not bad:
            return tuple(kept), par
        kept = [c for c in kept if all(c is not b for b in bad)]
    return None


def _qualifies(sub: Sequence[SnapshotCluster], p: Params) -> bool:
    counts: Dict[object, int] = {}
    for c in sub:
        for o in c.members:
            counts[o] = counts.get(o, 0) + 1
    par = {o for o, n in counts.items() if n >= p.k_p}
    return all(len(c.members & par) >= p.m_p for c in sub)


def maximal_qualifying(crowd: ClosedCrowd, p: Params) -> List[Tuple]:
    """All inclusion-maximal sub-crowds of length >= k_c meeting the participator rule."""
    n = len(crowd.clusters)
    if n > MAX_CROWD:
        raise OracleSizeError("crowd longer than %d clusters" % MAX_CROWD)
    found: List[frozenset] = []
    out = []
    for size in range(n, p.k_c - 1, -1):
        for idx in combinations(range(n), size):
            s = frozenset(idx)
            if any(s < f for f in found):
                continue
            sub = [crowd.clusters[i] for i in idx]
            if _qualifies(sub, p):
                found.append(s)
                out.append(tuple(sub))
    return out


class AggregationCheck:
    def __init__(self, aggregation: Optional[Aggregation], alternatives: List[Tuple]):
        self.aggregation = aggregation
        self.alternatives = alternatives  # qualifying maximal sub-crowds other than the fixpoint


def brute_force_aggregation(crowd: ClosedCrowd, p: Params, report: bool = False):
    """Closed aggregation of ``crowd`` recomputed from scratch.

    With ``report`` an AggregationCheck is returned that also lists any
    maximal qualifying sub-crowd different from the fixpoint.
    """
    if len(crowd.clusters) > MAX_CROWD:
        raise OracleSizeError("crowd longer than %d clusters" % MAX_CROWD)
    res = fixpoint_aggregation(crowd.clusters, p)
    agg = None if res is None else Aggregation(res[0], res[1], crowd.window)
    if not report:
        return agg
    fix_keys = None if agg is None else frozenset(agg.keys)
    alts = [sub for sub in maximal_qualifying(crowd, p)
            if frozenset(c.key for c in sub) != fix_keys]
    return AggregationCheck(agg, alts)
