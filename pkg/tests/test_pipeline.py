import json

from evogroup.model import DEFAULT_PARAMS
from evogroup.pipeline import Pipeline, dumps, run_records

from scenarios import FIG1_GROUPS, FIG1_PARAMS, fig1_points


def test_fig1_chain():
    pipe = Pipeline(FIG1_PARAMS)
    closed = []
    for rep in pipe.run(fig1_points()):
        closed += rep.closed_chains
    chains = closed + pipe.open_chains
    assert [ch.groups for ch in chains] == [[frozenset(g) for g in FIG1_GROUPS]]


def test_warmup_not_reported():
    reps = list(Pipeline(FIG1_PARAMS).run(fig1_points()))
    assert [r.full for r in reps] == [False, False, False, True, True, True, True]
    assert all(not r.vra for r in reps if not r.full)


def test_empty_stream():
    assert list(run_records(Pipeline(DEFAULT_PARAMS), [])) == []


def test_records_serial_vs_mtod_identical():
    a = [dumps(r) for r in run_records(Pipeline(FIG1_PARAMS), fig1_points())]
    b = [dumps(r) for r in run_records(
        Pipeline(FIG1_PARAMS, mode="mtod", workers=2, backend="thread"), fig1_points())]
    assert a == b
    recs = [json.loads(x) for x in a]
    assert recs[-1]["type"] == "evolving_group"
    assert [r["window"] for r in recs if r["type"] == "window"] == [[1, 4], [2, 5], [3, 6], [4, 7]]
