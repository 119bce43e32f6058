"""Multi-worker tick processing with sector partitions.

Per tick the new clusters are split by the partition built from their own
centers, and each worker scans its clusters against the ending clusters
bucketed into the regions each cluster covers under the previous tick's
partition. Workers only read the pre-tick snapshot. Inserting extensions
and running eager aggregation checks happen in the coordinating thread,
one worker result at a time; a final sweep after all workers finish
checks the remaining closed crowds. The resulting sets equal the serial
run for any worker count.
"""

from __future__ import annotations

import multiprocessing as mp
import os
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .aggregation import AggregationMiner, VraResult
from .crowds import (
    CandidateSet,
    ClosedCrowd,
    EndTable,
    ScanOutcome,
    apply_scan,
    emit_closed,
    finish_tick,
    scan_cluster,
)
from .model import Params, SnapshotCluster, Window
from .partition import FIRST, SectorPartition, bucket_disks, build_partition


class MtodError(RuntimeError):
    """A worker failed; the tick produced no output."""


# ---------------------------------------------------------------- workers

def _worker_loop(conn) -> None:
    cache: Dict[tuple, SnapshotCluster] = {}
    while True:
        try:
            msg = conn.recv()
        except EOFError:
            return
        if msg is None:
            return
        try:
            kind = msg[0]
            if kind == "reset":
                cache.clear()
                conn.send(("ok", None))
            elif kind == "scan":
                _, oldest, new_clusters, arrays, jobs, d = msg
                for k in [k for k in cache if k[0] < oldest]:
                    del cache[k]
                keys, t, centers, radii, marks = arrays
                table = EndTable(keys, [cache[k] for k in keys], t, centers, radii, marks)
                out = [scan_cluster(new_clusters[i], table, d, view=view) for i, view in jobs]
                for c in new_clusters:
                    cache[c.key] = c
                conn.send(("ok", out))
            else:
                raise ValueError(f"unknown message {kind!r}")
        except Exception:  # reported to the coordinator
            conn.send(("error", traceback.format_exc()))


class WorkerPool:
    """Persistent scan workers; ``backend`` is "process" or "thread"."""

    def __init__(self, workers: int, backend: str = "process"):
        if workers < 1:
            raise ValueError("workers must be at least 1")
        if backend not in ("process", "thread"):
            raise ValueError(f"unknown backend {backend!r}")
        self.workers = workers
        self.backend = backend
        self._procs = []
        self._conns = []
        self._threads: Optional[ThreadPoolExecutor] = None
        if backend == "process" and workers > 1:
            ctx = mp.get_context("fork") if "fork" in mp.get_all_start_methods() else mp.get_context()
            for _ in range(workers):
                parent, child = ctx.Pipe()
                proc = ctx.Process(target=_worker_loop, args=(child,), daemon=True)
                proc.start()
                child.close()
                self._procs.append(proc)
                self._conns.append(parent)
        elif workers > 1:
            self._threads = ThreadPoolExecutor(max_workers=workers)

    @property
    def remote(self) -> bool:
        return bool(self._conns)

    def reset(self) -> None:
        for conn in self._conns:
            conn.send(("reset",))
        for conn in self._conns:
            self._recv(conn)

    def _recv(self, conn):
        try:
            status, payload = conn.recv()
        except (EOFError, OSError) as exc:
            raise MtodError(f"worker died: {exc}") from exc
        if status != "ok":
            raise MtodError(f"worker failed:\n{payload}")
        return payload

    def run(self, table: EndTable, oldest: int, new_clusters: Sequence[SnapshotCluster],
            jobs: List[List[Tuple[int, np.ndarray]]], d: float):
        """Yield (worker, outcomes) as each worker finishes."""
        if self._conns:
            arrays = (table.keys, table.t, table.centers, table.radii, table.marks)
            for conn, job in zip(self._conns, jobs):
                conn.send(("scan", oldest, list(new_clusters), arrays, job, d))
            for w, conn in enumerate(self._conns):
                yield w, self._recv(conn)
            return

        def work(job):
            return [scan_cluster(new_clusters[i], table, d, view=view) for i, view in job]

        if self._threads is None:
            for w, job in enumerate(jobs):
                yield w, work(job)
            return
        futures = [self._threads.submit(work, job) for job in jobs]
        for w, fut in enumerate(futures):
            try:
                yield w, fut.result()
            except Exception as exc:
                raise MtodError(f"worker {w} failed: {exc!r}") from exc

    def close(self) -> None:
        for conn in self._conns:
            try:
                conn.send(None)
                conn.close()
            except OSError:
                pass
        for proc in self._procs:
            proc.join(timeout=5)
            if proc.is_alive():
                proc.terminate()
        self._procs, self._conns = [], []
        if self._threads is not None:
            self._threads.shutdown()
            self._threads = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def __del__(self):
        try:
            self.close()
        except Exception:
            pass


# ---------------------------------------------------------------- engine

@dataclass
class MtodStats:
    first: int = 0
    second: int = 0
    scanned: int = 0
    skipped_by_partition: int = 0
    per_worker: List[int] = field(default_factory=list)


class MtodEngine:
    """Runs the crowd and aggregation steps of one tick over a worker pool."""

    def __init__(self, params: Params, workers: int, backend: str = "process",
                 strict_paper_zones: bool = False, pool: Optional[WorkerPool] = None):
        self.params = params
        self.workers = workers
        self.strict = strict_paper_zones
        self._own_pool = pool is None
        self.pool = pool if pool is not None else WorkerPool(workers, backend)
        if self.pool.workers != workers:
            raise ValueError("pool size differs from worker count")
        self.pool.reset()
        self.partition: Optional[SectorPartition] = None
        self.stats = MtodStats(per_worker=[0] * workers)

    def close(self) -> None:
        if self._own_pool:
            self.pool.close()

    def _zone(self, table: EndTable, t_now: int) -> float:
        if self.strict:
            return self.params.d
        dt_max = int(t_now - table.t.min()) if len(table) else 1
        return self.params.d * max(dt_max, 1)

    def _views(self, table: EndTable, new_clusters, zone: float):
        """Ending-cluster indices each new cluster must be scanned against."""
        if self.partition is None or len(self.partition) == 1 or len(table) == 0:
            every = np.arange(len(table))
            return [every] * len(new_clusters)
        buckets = bucket_disks(self.partition, table.centers, table.radii)
        centers = np.array([c.center for c in new_clusters], dtype=float).reshape(-1, 2)
        radii = np.array([c.radius for c in new_clusters], dtype=float)
        views = []
        for regions in self.partition.covered(centers, radii, zone):
            if len(regions) == 1:
                self.stats.first += 1
            else:
                self.stats.second += 1
            parts = [buckets[k] for k in regions]
            views.append(np.unique(np.concatenate(parts)) if parts else np.arange(0))
        return views

    def step(self, cs: CandidateSet, new_clusters: Sequence[SnapshotCluster], window: Window,
             agg: Optional[AggregationMiner] = None, prune: bool = True):
        """Process one tick; returns (closed crowds, VRA results or None)."""
        p = self.params
        t_now = window.end
        if cs.origin is None:
            cs.origin = window.start
        new_clusters = sorted(new_clusters, key=lambda c: c.key)
        table = EndTable.from_candidates(cs)
        zone = self._zone(table, t_now)
        views = self._views(table, new_clusters, zone)
        self.stats.scanned += sum(len(v) for v in views)
        self.stats.skipped_by_partition += len(table) * len(new_clusters) - sum(len(v) for v in views)

        current = build_partition([c.center for c in new_clusters], self.workers, p.d,
                                  zone / p.d if p.d > 0 and not self.strict else 1.0)
        owner = current.locate([c.center for c in new_clusters]) if new_clusters else []
        jobs: List[List[Tuple[int, np.ndarray]]] = [[] for _ in range(self.workers)]
        for i, w in enumerate(owner):
            jobs[int(w)].append((i, views[i]))
        for w, job in enumerate(jobs):
            self.stats.per_worker[w] += len(job)

        oldest = window.start
        outcomes: Dict[int, ScanOutcome] = {}
        results: List[VraResult] = []
        if agg is not None:
            agg.begin(window)
        cs.register(new_clusters)
        # serialized section: merge each worker's results as it arrives
        for w, out in self.pool.run(table, oldest, new_clusters, jobs, p.d):
            for (i, _), outcome in zip(jobs[w], out):
                outcomes[i] = outcome
                for cand in apply_scan(cs, new_clusters[i], outcome, table):
                    if agg is not None and len(cand) >= p.k_c:
                        crowd = ClosedCrowd(tuple(cs.clusters[k] for k in cand), window)
                        results.append(agg.verify(crowd))
        # barrier passed: sweep the closed crowds not checked yet
        closed = emit_closed(cs, t_now, p, window)
        if agg is not None:
            for crowd in closed:
                if crowd.keys[-1][0] != t_now:
                    results.append(agg.verify(crowd))
            results = agg.commit()
        finish_tick(cs, t_now, p, window, prune, None,
                    [outcomes[i] for i in sorted(outcomes)])
        self.partition = current
        return closed, (results if agg is not None else None)


def default_workers() -> int:
    return os.cpu_count() or 1
