"""Evolution links between groups of consecutive windows.

Groups are kept as a DAG: a group of window ``j`` links to every group of
window ``j - 1`` sharing at least ``m_g * min(sizes)`` members. When a
group of the previous window gains no successor, every maximal path ending
at it with at least ``k_g`` nodes is reported as a closed evolving group.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from operator import attrgetter
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .model import Params, Window


def link_groups(prev_groups: Sequence[FrozenSet], new_groups: Sequence[FrozenSet],
                m_g: float) -> List[Tuple[int, int, int]]:
    """All ``(i, j, |prev_i & new_j|)`` meeting the shared-member threshold."""
    edges = []
    for i, a in enumerate(prev_groups):
        for j, b in enumerate(new_groups):
            if not a or not b:
                continue
            shared = len(a & b)
            # tolerate round-off in m_g * size, e.g. 0.7 * 10
            need = m_g * min(len(a), len(b))
            if shared > 0 and shared >= need - 1e-9 * max(1.0, need):
                edges.append((i, j, shared))
    return edges


@dataclass(eq=False)
class GroupNode:
    window: Window
    members: FrozenSet
    sources: list = field(default_factory=list)  # aggregations yielding this group
    parents: List[Tuple["GroupNode", int]] = field(default_factory=list, repr=False)
    node_id: int = -1
    longest: int = 1  # nodes on the longest backward path, this one included
    label: tuple = field(default=(), repr=False)  # sorted member names
    sig: tuple = field(default=(), repr=False)

    def __post_init__(self):
        self.label = tuple(sorted(map(str, self.members)))
        self.sig = (self.window.start, self.window.end, self.label)

    def __repr__(self):
        return f"GroupNode(#{self.node_id} w={self.window.end} {sorted(self.members)})"


_SIG = attrgetter("sig")


@dataclass(frozen=True, eq=False)
class EvolvingGroup:
    nodes: Tuple[GroupNode, ...]
    shared: Tuple[int, ...]  # intersection size of each consecutive pair
    closed: bool

    def __len__(self):
        return len(self.nodes)

    @property
    def windows(self) -> List[Window]:
        return [n.window for n in self.nodes]

    @property
    def groups(self) -> List[FrozenSet]:
        return [n.members for n in self.nodes]

    def signature(self):
        """Hashable, totally ordered description: windows and sorted members."""
        return tuple(map(_SIG, self.nodes))

    def __eq__(self, other):
        if not isinstance(other, EvolvingGroup):
            return NotImplemented
        return self.signature() == other.signature() and self.closed == other.closed

    def __hash__(self):
        return hash(self.signature())


def _paths_to(node: GroupNode, min_len: int = 1, limit: Optional[int] = None):
    """Maximal backward paths ending at ``node`` with at least ``min_len`` nodes.

    Returns (paths, truncated); each path is a (nodes, shared) pair. The
    walk visits parents in insertion order, so a ``limit`` cut is
    deterministic.
    """
    out = []
    if node.longest < min_len:
        return out, False
    stack = [(node, (node,), ())]
    while stack:
        cur, nodes, shared = stack.pop()
        if not cur.parents:
            if limit is not None and len(out) >= limit:
                return out, True
            out.append((tuple(reversed(nodes)), tuple(reversed(shared))))
            continue
        for parent, n in reversed(cur.parents):
            if len(nodes) + parent.longest >= min_len:
                stack.append((parent, nodes + (parent,), shared + (n,)))
    return out, False


class EvolutionTracker:
    """Keeps the group DAG of recent windows and reports evolving groups.

    ``max_paths`` caps the chains reported per closing group; a dense DAG
    can hold exponentially many maximal paths. Cut nodes are counted in
    ``truncated``.
    """

    def __init__(self, params: Params, max_paths: Optional[int] = 1000):
        self.params = params
        self.max_paths = max_paths
        self.truncated = 0
        self.current: List[GroupNode] = []
        self.window: Optional[Window] = None
        self._next_id = 0

    def _chains(self, node: GroupNode, closed: bool) -> List[EvolvingGroup]:
        paths, cut = _paths_to(node, self.params.k_g, self.max_paths)
        self.truncated += cut
        return [EvolvingGroup(nodes, shared, closed) for nodes, shared in paths]

    def advance(self, window: Window, groups: Iterable) -> List[EvolvingGroup]:
        """Add the groups of ``window``; returns chains closed by this step.

        ``groups`` holds member sets or aggregations (anything with a
        ``group`` attribute). Identical member sets share one node.
        """
        if self.window is not None and window.end <= self.window.end:
            raise ValueError("windows must advance")
        nodes: Dict[FrozenSet, GroupNode] = {}
        for g in groups:
            members = frozenset(getattr(g, "group", g))
            if not members:
                continue
            node = nodes.get(members)
            if node is None:
                node = nodes[members] = GroupNode(window, members)
            if hasattr(g, "group"):
                node.sources.append(g)
        new = sorted(nodes.values(), key=lambda n: n.label)
        for n in new:
            n.node_id = self._next_id
            self._next_id += 1

        prev = self.current if self.window is not None and window.end == self.window.end + 1 else []
        matched = set()
        for i, j, shared in link_groups([n.members for n in prev], [n.members for n in new],
                                        self.params.m_g):
            new[j].parents.append((prev[i], shared))
            new[j].longest = max(new[j].longest, prev[i].longest + 1)
            matched.add(i)
        closed = []
        for i, node in enumerate(self.current):
            if i not in matched:
                closed.extend(self._chains(node, True))
        self.current = new
        self.window = window
        return closed

    def finish(self) -> List[EvolvingGroup]:
        """Report chains still open at the end of the stream."""
        out = []
        for node in self.current:
            out.extend(self._chains(node, False))
        self.current = []
        return out

    def live_nodes(self) -> List[GroupNode]:
        """Every node still reachable backwards from the current window."""
        seen: Dict[int, GroupNode] = {}
        stack = list(self.current)
        while stack:
            n = stack.pop()
            if id(n) in seen:
                continue
            seen[id(n)] = n
            stack.extend(p for p, _ in n.parents)
        return sorted(seen.values(), key=lambda n: n.node_id)

    def to_dot(self) -> str:
        lines = ["digraph evolution {", "  rankdir=LR;"]
        for n in self.live_nodes():
            label = "w%d: %s" % (n.window.end, ",".join(map(str, sorted(n.members, key=repr))))
            lines.append(f'  n{n.node_id} [label="{label}"];')
            for p, shared in n.parents:
                lines.append(f'  n{p.node_id} -> n{n.node_id} [label="{shared}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def chains_to_dot(chains: Sequence[EvolvingGroup]) -> str:
    """DOT graph of the union of the given chains."""
    seen, edges = {}, set()
    for ch in chains:
        for n in ch.nodes:
            seen[n.node_id] = n
        for (a, b), s in zip(zip(ch.nodes, ch.nodes[1:]), ch.shared):
            edges.add((a.node_id, b.node_id, s))
    lines = ["digraph evolution {", "  rankdir=LR;"]
    for nid in sorted(seen):
        n = seen[nid]
        label = "w%d: %s" % (n.window.end, ",".join(map(str, sorted(n.members, key=repr))))
        lines.append(f'  n{nid} [label="{label}"];')
    for a, b, s in sorted(edges):
        lines.append(f'  n{a} -> n{b} [label="{s}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
