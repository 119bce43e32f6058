import numpy as np
import pytest

from evogroup.mtod import MtodError, WorkerPool
from evogroup.pipeline import Pipeline

from randgen import random_params, random_stream
from scenarios import TABLE2_PARAMS, by_tick, table2_clusters


def canon(pipe, stream):
    out = []
    for t in sorted(stream):
        rep = pipe.step_clusters(t, stream[t])
        out.append((sorted(c.keys for c in rep.crowds),
                    sorted((a.keys, tuple(sorted(a.group))) for a in rep.aggregations),
                    {ch.signature() for ch in rep.closed_chains}))
    out.append({ch.signature() for ch in pipe.finish()})
    return out


@pytest.mark.parametrize("backend", ["thread", "process"])
def test_table2_two_workers(backend):
    stream = by_tick(table2_clusters(geometric=True))
    serial = canon(Pipeline(TABLE2_PARAMS), stream)
    with Pipeline(TABLE2_PARAMS, mode="mtod", workers=2, backend=backend) as pipe:
        assert canon(pipe, stream) == serial
    assert serial[3][0] == [((1, 1), (3, 1), (4, 1)), ((2, 1), (3, 1), (4, 1))]


@pytest.mark.parametrize("backend", ["thread", "process"])
def test_random_streams_equal_serial(backend):
    with WorkerPool(3, backend) as pool:
        for seed in range(15):
            rng = np.random.default_rng(seed)
            p = random_params(rng, max_w=7)
            stream = random_stream(rng, 12, 10, objects=16, m_c=p.m_c, box=25)
            ref = canon(Pipeline(p), stream)
            assert canon(Pipeline(p, mode="mtod", workers=3, pool=pool), stream) == ref


def test_partition_actually_skips_pairs():
    rng = np.random.default_rng(4)
    p = random_params(rng).replace(w=5, k_c=3, d=0.5)
    stream = random_stream(rng, 10, 12, objects=30, m_c=p.m_c, box=200)
    pipe = Pipeline(p, mode="mtod", workers=4, backend="thread")
    for t in sorted(stream):
        pipe.step_clusters(t, stream[t])
    st = pipe.engine.stats
    assert st.skipped_by_partition > 0 and st.first + st.second > 0
    assert sum(st.per_worker) == sum(len(v) for v in stream.values())


def test_worker_failure_aborts():
    with WorkerPool(2, "process") as pool:
        pool._conns[0].send(("bogus",))
        with pytest.raises(MtodError):
            pool._recv(pool._conns[0])


def test_strict_zones_flag_runs():
    stream = by_tick(table2_clusters(geometric=True))
    pipe = Pipeline(TABLE2_PARAMS, mode="mtod", workers=2, backend="thread",
                    strict_paper_zones=True)
    for t in sorted(stream):
        pipe.step_clusters(t, stream[t])
