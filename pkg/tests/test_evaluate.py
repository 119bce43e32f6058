from fractions import Fraction

import pytest

from evogroup.evaluate import (AnnotationError, convert_pedestrian_groups, evaluate,
                               groups_from_records, jaccard, match_groups, read_group_file)

A, B, C = frozenset("abc"), frozenset("def"), frozenset("xyz")


def test_exact():
    r = evaluate([A, B], [A, B])
    assert (r.precision, r.recall) == (1, 1)


def test_nothing_detected():
    r = evaluate([], [A])
    assert r.precision == 0 and not r.precision_defined and r.recall == 0


def test_one_spurious():
    r = evaluate([A, B, C], [A, B])
    assert r.precision == Fraction(2, 3) and r.recall == 1 and (r.tp, r.fp, r.fn) == (2, 1, 0)


def test_threshold_and_greedy():
    assert jaccard(frozenset("abcd"), frozenset("abce")) == Fraction(3, 5)
    # detected 0 overlaps both; the better pair is taken first
    det = [frozenset("abcd"), frozenset("abce")]
    tru = [frozenset("abce")]
    assert match_groups(det, tru) == [(1, 0, Fraction(1))]
    assert evaluate([frozenset("abcd")], [frozenset("abce")], 1.0).tp == 0
    assert evaluate([frozenset("abcd")], [frozenset("abce")], 0.5).tp == 1


def test_periods_isolated():
    r = evaluate({"p1": [A], "p2": [B]}, {"p1": [B], "p2": [B]})
    assert (r.tp, r.fp, r.fn) == (1, 1, 1)


def test_group_file(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("# truth\np1: a b c\n\nd,e,f\n")
    assert read_group_file(str(p)) == {"p1": [A], None: [B]}
    p.write_text("p1: a a\n")
    with pytest.raises(AnnotationError):
        read_group_file(str(p))


def test_records_and_converter(tmp_path):
    lines = ['{"type":"window","groups":[["a","b","c"]]}', '{"type":"window","groups":[["a","b","c"]]}',
             '{"type":"evolving_group"}']
    assert groups_from_records(lines) == [A]
    src, dst = tmp_path / "raw.txt", tmp_path / "out.txt"
    src.write_text("1 2 3\n4\n5,6\n")
    assert convert_pedestrian_groups(str(src), str(dst)) == 2
    assert read_group_file(str(dst)) == {None: [frozenset("123"), frozenset("56")]}
