"""Closed aggregations inside closed crowds, with counts reused across windows.

The removal loop drops every invalid cluster of a round at once and recounts.
Validity is monotone in the cluster set (a cluster valid inside ``S`` stays
valid inside any superset of ``S``), so the loop converges to the greatest
valid subset of the crowd. That subset is unique, which is why falling back
to the previous window's aggregation gives the same answer as continuing.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence

from .crowds import ClosedCrowd
from .model import ClusterKey, Params, SnapshotCluster, Window, format_key


@dataclass
class ParticipatorTable:
    """Per-object count of crowd clusters containing the object."""

    counts: Dict[object, int]

    @classmethod
    def of(cls, clusters: Iterable[SnapshotCluster]) -> "ParticipatorTable":
        counts: Counter = Counter()
        for c in clusters:
            counts.update(c.members)
        return cls(dict(counts))

    def participators(self, k_p: int) -> FrozenSet:
        return frozenset(o for o, n in self.counts.items() if n >= k_p)

    def restricted(self, objects) -> Dict[object, int]:
        return {o: self.counts.get(o, 0) for o in sorted(objects)}


def participators(crowd: ClosedCrowd, p: Optional[Params] = None) -> ParticipatorTable:
    return ParticipatorTable.of(crowd.clusters)


@dataclass(frozen=True, eq=False)
class Aggregation:
    clusters: tuple
    group: FrozenSet
    window: Window

    @property
    def keys(self):
        return tuple(c.key for c in self.clusters)

    def __len__(self):
        return len(self.clusters)

    def __eq__(self, other):
        if not isinstance(other, Aggregation):
            return NotImplemented
        return (self.keys, self.group, self.window) == (other.keys, other.group, other.window)

    def __hash__(self):
        return hash((self.keys, self.group, self.window))

    def __repr__(self):
        body = ",".join(format_key(k) for k in self.keys)
        return f"Aggregation(<{body}>, group={sorted(self.group)})"


@dataclass
class RoundTrace:
    """One pass of the removal loop."""

    clusters: List[ClusterKey]
    counts: Dict[object, int]  # over the previous round's participators
    participators: FrozenSet
    invalid: List[ClusterKey]


@dataclass
class VraResult:
    crowd: ClosedCrowd
    table: ParticipatorTable  # counts over the whole crowd
    aggregation: Optional[Aggregation]
    rounds: List[RoundTrace] = field(default_factory=list)
    incremental: bool = False
    fell_back: bool = False
    # incremental path only: counts once the dropped clusters are subtracted
    after_removal: Optional[Dict[object, int]] = None


def _greatest_valid(clusters: Sequence[SnapshotCluster], counts: Dict[object, int],
                    p: Params, prev_par: Optional[FrozenSet], rounds: List[RoundTrace],
                    stop_on: Optional[ClusterKey] = None):
    """Run the removal loop; returns (kept clusters, participators, stopped).

    ``stopped`` is true when ``stop_on`` turned invalid while at least k_c
    clusters would remain, which is where the caller may fall back.
    """
    kept = list(clusters)
    counts = dict(counts)
    while True:
        par = frozenset(o for o, n in counts.items() if n >= p.k_p)
        shown = prev_par if prev_par is not None else frozenset(counts)
        invalid = [c for c in kept if len(c.members & par) < p.m_p]
        rounds.append(RoundTrace([c.key for c in kept],
                                 {o: counts.get(o, 0) for o in sorted(shown)},
                                 par, [c.key for c in invalid]))
        if not invalid:
            return kept, par, False
        if len(kept) - len(invalid) < p.k_c:
            return None, par, False
        if stop_on is not None and any(c.key == stop_on for c in invalid):
            return None, par, True
        gone = {id(c) for c in invalid}
        for c in invalid:
            for o in c.members:
                counts[o] -= 1
        kept = [c for c in kept if id(c) not in gone]
        prev_par = par


@dataclass
class _WindowState:
    crowd: ClosedCrowd
    table: ParticipatorTable
    aggregation: Optional[Aggregation]


def vra(crowd: ClosedCrowd, prev: Optional[_WindowState], p: Params) -> VraResult:
    """Closed aggregation of ``crowd``, reusing the predecessor state if any."""
    if len(crowd) < p.k_c:
        return VraResult(crowd, ParticipatorTable.of(crowd.clusters), None)
    if prev is None:
        table = ParticipatorTable.of(crowd.clusters)
    else:
        old = {c.key: c for c in prev.crowd.clusters}
        new = {c.key: c for c in crowd.clusters}
        counts = Counter(prev.table.counts)
        for k, c in old.items():
            if k not in new:
                counts.subtract(c.members)
        after_removal = {o: n for o, n in counts.items() if n > 0}
        for k, c in new.items():
            if k not in old:
                counts.update(c.members)
        table = ParticipatorTable({o: n for o, n in counts.items() if n > 0})

    t_end = crowd.window.end
    newest = crowd.clusters[-1].key if crowd.clusters[-1].t == t_end else None
    result = VraResult(crowd, table, None, incremental=prev is not None)
    if prev is not None:
        result.after_removal = after_removal
    stop_on = newest if prev is not None else None
    kept, par, stopped = _greatest_valid(crowd.clusters, table.counts, p, None,
                                         result.rounds, stop_on)
    if stopped:
        result.fell_back = True
        if prev.aggregation is None:
            return result
        expired = crowd.window.start - 1
        base = [c for c in prev.aggregation.clusters if c.t != expired]
        if len(base) < p.k_c:
            return result
        counts = Counter()
        for c in base:
            counts.update(c.members)
        kept, par, _ = _greatest_valid(base, dict(counts), p, None, result.rounds)
    if kept is not None:
        result.aggregation = Aggregation(tuple(kept), par, crowd.window)
    return result


def _drop_tick(keys, t):
    return tuple(k for k in keys if k[0] != t)


class AggregationMiner:
    """Runs VRA over each window's closed crowds, keeping state for the next."""

    def __init__(self, params: Params):
        self.params = params
        self.prev: List[_WindowState] = []
        self.prev_window: Optional[Window] = None

    def predecessor(self, crowd: ClosedCrowd, index) -> Optional[_WindowState]:
        if index is None:
            return None
        return index.get(_drop_tick(crowd.keys, crowd.window.end))

    def _index(self, window: Window):
        if self.prev_window is None or self.prev_window.end != window.end - 1:
            return None
        expired = window.start - 1 if window.start > self.prev_window.start else None
        index = {}
        for state in self.prev:
            key = state.crowd.keys if expired is None else _drop_tick(state.crowd.keys, expired)
            index.setdefault(key, state)
        return index

    def begin(self, window: Window) -> None:
        """Start a window; ``verify`` may then be called in any order."""
        self._window = window
        self._lookup = self._index(window)
        self._results: List[VraResult] = []

    def verify(self, crowd: ClosedCrowd) -> VraResult:
        result = vra(crowd, self.predecessor(crowd, self._lookup), self.params)
        self._results.append(result)
        return result

    def commit(self) -> List[VraResult]:
        """Close the window; results come back in canonical crowd order."""
        results = sorted(self._results, key=lambda r: r.crowd.keys)
        self.prev = [_WindowState(r.crowd, r.table, r.aggregation) for r in results]
        self.prev_window = self._window
        self._results = []
        return results

    def process(self, crowds: Sequence[ClosedCrowd], window: Window) -> List[VraResult]:
        self.begin(window)
        for cr in crowds:
            self.verify(cr)
        return self.commit()


def is_valid_aggregation(agg: Aggregation, p: Params) -> bool:
    """Direct re-check of the participator and length conditions."""
    if len(agg) < p.k_c:
        return False
    table = ParticipatorTable.of(agg.clusters)
    par = table.participators(p.k_p)
    if par != agg.group:
        return False
    return all(len(c.members & par) >= p.m_p for c in agg.clusters)
