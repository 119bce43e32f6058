"""Precision and recall of detected groups against annotated groups.

Group files are plain text, one group per line::

    # comment
    [period:] member member member

Members are separated by spaces or commas. Lines sharing a period label are
matched only with each other; unlabelled lines form one shared period.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, Hashable, Iterable, List, Optional, Sequence, Tuple

_SPLIT = re.compile(r"[,\s]+")


class AnnotationError(ValueError):
    """Malformed group file."""


@dataclass(frozen=True)
class EvalResult:
    tp: int
    fp: int
    fn: int
    precision: Fraction
    recall: Fraction
    precision_defined: bool
    recall_defined: bool
    matches: Tuple[Tuple[int, int, Fraction], ...] = ()

    def as_dict(self) -> dict:
        return {
            "tp": self.tp, "fp": self.fp, "fn": self.fn,
            "precision": float(self.precision), "recall": float(self.recall),
            "precision_defined": self.precision_defined,
            "recall_defined": self.recall_defined,
        }


def jaccard(a: FrozenSet, b: FrozenSet) -> Fraction:
    union = len(a | b)
    return Fraction(len(a & b), union) if union else Fraction(1)


def match_groups(detected: Sequence[FrozenSet], truth: Sequence[FrozenSet],
                 threshold: float = 0.5) -> List[Tuple[int, int, Fraction]]:
    """Greedy one-to-one matching by descending Jaccard, ties by index."""
    thr = Fraction(threshold).limit_denominator(10**9)
    pairs = []
    for i, d in enumerate(detected):
        for j, t in enumerate(truth):
            s = jaccard(d, t)
            if s >= thr and s > 0:
                pairs.append((-s, i, j))
    pairs.sort()
    used_d, used_t, out = set(), set(), []
    for neg, i, j in pairs:
        if i in used_d or j in used_t:
            continue
        used_d.add(i)
        used_t.add(j)
        out.append((i, j, -neg))
    return out


def evaluate(detected, truth, match_threshold: float = 0.5) -> EvalResult:
    """Score ``detected`` against ``truth``.

    Each argument is either a sequence of member sets or a mapping from
    period label to such a sequence. An undefined ratio is reported as 0
    with its ``*_defined`` flag cleared.
    """
    det = _by_period(detected)
    tru = _by_period(truth)
    tp, matches = 0, []
    n_det = sum(len(v) for v in det.values())
    n_tru = sum(len(v) for v in tru.values())
    for period in sorted(set(det) & set(tru), key=repr):
        m = match_groups(det[period], tru[period], match_threshold)
        tp += len(m)
        matches.extend(m)
    fp, fn = n_det - tp, n_tru - tp
    p_def, r_def = n_det > 0, n_tru > 0
    precision = Fraction(tp, n_det) if p_def else Fraction(0)
    recall = Fraction(tp, n_tru) if r_def else Fraction(0)
    return EvalResult(tp, fp, fn, precision, recall, p_def, r_def, tuple(matches))


def _by_period(groups) -> Dict[Hashable, List[FrozenSet]]:
    if isinstance(groups, dict):
        return {k: [frozenset(g) for g in v] for k, v in groups.items()}
    return {None: [frozenset(g) for g in groups]}


def read_group_file(path: str):
    """Parse a group file into a period mapping (see module docstring)."""
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise AnnotationError(f"cannot read {path}: {exc}") from exc
    out: Dict[Hashable, List[FrozenSet]] = {}
    with fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            period = None
            if ":" in line:
                period, _, line = line.partition(":")
                period = period.strip()
                if not period:
                    raise AnnotationError(f"line {n}: empty period label")
            members = [m for m in _SPLIT.split(line.strip()) if m]
            if not members:
                raise AnnotationError(f"line {n}: group has no members")
            if len(set(members)) != len(members):
                raise AnnotationError(f"line {n}: repeated member")
            out.setdefault(period, []).append(frozenset(members))
    return out


def groups_from_records(lines: Iterable[str]) -> List[FrozenSet]:
    """Distinct groups found in the NDJSON output of ``run``."""
    seen, out = set(), []
    for n, line in enumerate(lines, 1):
        line = line.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise AnnotationError(f"record {n}: {exc}") from exc
        if rec.get("type") != "window":
            continue
        for g in rec.get("groups", []):
            key = frozenset(str(m) for m in g)
            if key not in seen:
                seen.add(key)
                out.append(key)
    return out


def convert_pedestrian_groups(src: str, dst: str, period: Optional[str] = None) -> int:
    """Normalise a pedestrian-style group list into a group file.

    Assumes one group per input line, members given as whitespace or comma
    separated ids, and no per-period split; every group goes to ``period``
    (or the shared period). Returns the number of groups written.
    """
    count = 0
    with open(src, encoding="utf-8") as fin, open(dst, "w", encoding="utf-8") as fout:
        for line in fin:
            members = [m for m in _SPLIT.split(line.strip()) if m]
            if len(members) < 2:
                continue
            prefix = f"{period}: " if period else ""
            fout.write(prefix + " ".join(members) + "\n")
            count += 1
    return count
