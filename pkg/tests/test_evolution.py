from itertools import product

from hypothesis import given, settings, strategies as st

from evogroup.evolution import EvolutionTracker, chains_to_dot, link_groups
from evogroup.model import Params, Window


def P(k_g=2, m_g=0.75):
    return Params(w=4, k_c=3, m_c=3, d=1, k_p=2, m_p=3, m_g=m_g, k_g=k_g, eps=1, min_pts=1)


def test_link_threshold():
    g1, g2 = frozenset("abcd"), frozenset("abcde")
    assert link_groups([g1], [g2], 0.75) == [(0, 0, 4)]
    assert link_groups([g1], [g1], 1.0) == [(0, 0, 4)]
    assert link_groups([g1], [frozenset("xyz")], 0.01) == []
    assert link_groups([frozenset("abcd")], [frozenset("abxy")], 0.75) == []


def test_chain_closes_when_not_extended():
    tr = EvolutionTracker(P(k_g=2))
    assert tr.advance(Window(0, 3), [frozenset("abc")]) == []
    assert tr.advance(Window(1, 4), [frozenset("abc")]) == []
    closed = tr.advance(Window(2, 5), [frozenset("xyz")])
    assert len(closed) == 1 and closed[0].closed
    assert closed[0].groups == [frozenset("abc")] * 2
    assert tr.finish() == []  # xyz alone is shorter than k_g


def test_single_group_k1():
    tr = EvolutionTracker(P(k_g=1))
    tr.advance(Window(0, 3), [frozenset("abc")])
    (ch,) = tr.finish()
    assert not ch.closed and len(ch) == 1


def test_branching_shares_prefix():
    tr = EvolutionTracker(P(k_g=3, m_g=0.5))
    tr.advance(Window(0, 0), [frozenset("abcdef")])
    tr.advance(Window(1, 1), [frozenset("abcdef")])
    tr.advance(Window(2, 2), [frozenset("abc"), frozenset("def")])
    chains = tr.finish()
    assert sorted(ch.groups[-1] for ch in chains) == sorted([frozenset("abc"), frozenset("def")])
    assert all(ch.groups[:2] == [frozenset("abcdef")] * 2 for ch in chains)
    dot = chains_to_dot(chains)
    assert dot.count("->") == 3 and tr.to_dot() == tr.to_dot()


def test_gap_in_windows_breaks_chain():
    tr = EvolutionTracker(P(k_g=1))
    tr.advance(Window(0, 0), [frozenset("abc")])
    closed = tr.advance(Window(5, 5), [frozenset("abc")])
    assert len(closed) == 1 and len(tr.finish()) == 1


@settings(max_examples=80, deadline=None)
@given(st.lists(st.lists(st.sets(st.sampled_from("abcdef"), min_size=1), max_size=3),
                min_size=1, max_size=4),
       st.sampled_from([0.34, 0.5, 0.75, 1.0]), st.integers(1, 3))
def test_reported_chains_are_all_maximal_paths(windows, m_g, k_g):
    tr = EvolutionTracker(P(k_g=k_g, m_g=m_g))
    reported = []
    for i, groups in enumerate(windows):
        reported += tr.advance(Window(i, i), [frozenset(g) for g in groups])
    reported += tr.finish()
    got = {tuple(ch.groups) for ch in reported}

    layers = [sorted({frozenset(g) for g in gs}, key=sorted) for gs in windows]

    def ok(a, b):
        return len(a & b) >= m_g * min(len(a), len(b)) - 1e-9

    expected = set()
    for i, layer in enumerate(layers):
        for j, layer2 in enumerate(layers):
            if j < i:
                continue
            for path in product(*layers[i:j + 1]):
                if not all(ok(a, b) for a, b in zip(path, path[1:])):
                    continue
                if i > 0 and any(ok(g, path[0]) for g in layers[i - 1]):
                    continue
                if j + 1 < len(layers) and any(ok(path[-1], g) for g in layers[j + 1]):
                    continue
                if len(path) >= k_g:
                    expected.add(tuple(path))
    assert got == expected
    for ch in reported:
        for (a, b), s in zip(zip(ch.groups, ch.groups[1:]), ch.shared):
            assert s == len(a & b) and s >= m_g * min(len(a), len(b)) - 1e-9
