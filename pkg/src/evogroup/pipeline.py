"""Per-tick driver: cluster, expire, mine crowds, verify aggregations, link groups.

The window grows from the first tick seen until it holds ``w`` ticks and
slides afterwards. Miner and aggregation state is built from the first
tick, but windows, aggregations and evolution are reported for full
windows only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

from .aggregation import Aggregation, AggregationMiner, VraResult
from .clustering import cluster_snapshot
from .crowds import CandidateSet, ClosedCrowd, Linker, TickTrace, expire, incre_update
from .evolution import EvolutionTracker, EvolvingGroup
from .model import Params, SnapshotCluster, TrajectoryPoint, Window, format_key, validate_params


@dataclass
class TickReport:
    t: int
    window: Window
    full: bool
    clusters: List[SnapshotCluster]
    crowds: List[ClosedCrowd]
    vra: List[VraResult] = field(default_factory=list)
    closed_chains: List[EvolvingGroup] = field(default_factory=list)

    @property
    def aggregations(self) -> List[Aggregation]:
        return [r.aggregation for r in self.vra if r.aggregation is not None]

    @property
    def groups(self) -> List[frozenset]:
        return sorted({a.group for a in self.aggregations}, key=_members_order)


def _members_order(members):
    return sorted(map(repr, members))


def _obj(o):
    return o if isinstance(o, (int, str)) else repr(o)


def _sorted_members(members):
    return [_obj(o) for o in sorted(members, key=lambda o: (type(o).__name__, o))]


def chain_record(ch: EvolvingGroup) -> dict:
    return {
        "type": "evolving_group",
        "closed": ch.closed,
        "windows": [[n.window.start, n.window.end] for n in ch.nodes],
        "groups": [_sorted_members(n.members) for n in ch.nodes],
        "shared": list(ch.shared),
    }


def window_record(rep: TickReport) -> dict:
    return {
        "type": "window",
        "window": [rep.window.start, rep.window.end],
        "crowds": [[format_key(k) for k in cr.keys] for cr in rep.crowds],
        "aggregations": [
            {"clusters": [format_key(k) for k in a.keys], "group": _sorted_members(a.group)}
            for a in sorted(rep.aggregations, key=lambda a: a.keys)
        ],
        "groups": [_sorted_members(g) for g in rep.groups],
        "closed_evolving_groups": [chain_record(ch) for ch in _sorted_chains(rep.closed_chains)],
    }


def _sorted_chains(chains: Sequence[EvolvingGroup]) -> List[EvolvingGroup]:
    def key(ch):
        return [(n.window.end, _members_order(n.members)) for n in ch.nodes]
    return sorted(chains, key=key)


class Pipeline:
    """Streaming driver in serial or MTOD mode."""

    def __init__(self, params: Params, mode: str = "serial", workers: int = 1,
                 backend: str = "process", strict_paper_zones: bool = False,
                 linker: Optional[Linker] = None, pool=None, trace: bool = False):
        self.params = validate_params(params)
        if mode not in ("serial", "mtod"):
            raise ValueError(f"unknown mode {mode!r}")
        self.mode = mode
        self.linker = linker
        self.cs = CandidateSet()
        self.agg = AggregationMiner(params)
        self.evo = EvolutionTracker(params)
        self.t: Optional[int] = None
        self.trace = trace
        self.traces: List[TickTrace] = []
        self.all_chains: List[EvolvingGroup] = []  # every chain reported so far
        self.engine = None
        if mode == "mtod":
            if linker is not None:
                raise ValueError("custom linkers run in serial mode only")
            from .mtod import MtodEngine
            self.engine = MtodEngine(params, workers, backend, strict_paper_zones, pool=pool)

    def close(self) -> None:
        if self.engine is not None:
            self.engine.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def window_for(self, t: int) -> Window:
        origin = t if self.cs.origin is None else self.cs.origin
        return Window(max(origin, t - self.params.w + 1), t)

    def step_clusters(self, t: int, clusters: Sequence[SnapshotCluster]) -> TickReport:
        p = self.params
        if self.t is not None and t != self.t + 1:
            raise ValueError(f"expected tick {self.t + 1}, got {t}")
        window = self.window_for(t)
        if self.cs.origin is None:
            self.cs.origin = t
        if window.start > self.cs.origin:
            expire(self.cs, window.start - 1, p, window)
        self.t = t
        clusters = sorted(clusters, key=lambda c: c.key)
        if self.engine is None:
            tr = TickTrace(after_expiry=self.cs.candidates()) if self.trace else None
            _, crowds = incre_update(self.cs, clusters, p, window, linker=self.linker, trace=tr)
            if tr is not None:
                self.traces.append(tr)
            results = self.agg.process(crowds, window)
        else:
            crowds, results = self.engine.step(self.cs, clusters, window, self.agg)
        full = window.length == p.w
        rep = TickReport(t, window, full, list(clusters), crowds)
        if full:
            rep.vra = results
            rep.closed_chains = self.evo.advance(window, rep.aggregations)
            self.all_chains.extend(rep.closed_chains)
        return rep

    def step(self, t: int, points: Iterable[TrajectoryPoint]) -> TickReport:
        return self.step_clusters(t, cluster_snapshot(points, self.params))

    def finish(self) -> List[EvolvingGroup]:
        chains = self.evo.finish()
        self.all_chains.extend(chains)
        return chains

    def run(self, ticks: Iterable[Tuple[int, Sequence[TrajectoryPoint]]]):
        """Yield a TickReport per tick, then the open chains via ``self.open_chains``."""
        for t, points in ticks:
            yield self.step(t, points)
        self.open_chains = self.finish()


def run_records(pipeline: Pipeline, ticks) -> Iterable[dict]:
    """NDJSON-ready records: one per full window, then still-open chains."""
    for rep in pipeline.run(ticks):
        if rep.full:
            yield window_record(rep)
    for ch in _sorted_chains(pipeline.open_chains):
        yield chain_record(ch)


def dumps(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))
