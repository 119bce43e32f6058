"""Seeded synthetic trajectories with scripted group behaviour.

A script is a dict (usually loaded from JSON)::

    {"seed": 7, "ticks": 20, "objects": 40, "area": 2000.0,
     "groups": [{"name": "a", "size": 6, "at": [0, 0], "velocity": [5, 0]}],
     "events": [{"tick": 10, "type": "split", "group": "a",
                 "into": ["a1", "a2"], "velocities": [[5, 8], [5, -8]]}]}

Event types: ``form`` (a new group appears; same fields as a ``groups``
entry), ``travel`` (new velocity), ``split``, ``merge`` (``groups`` into
``into``) and ``disperse`` (members turn into noise walkers). Objects not
in any group walk randomly over the area. Members keep a fixed offset from
their group center, drawn inside a disk of radius ``spread``, plus a small
jitter.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from .model import TrajectoryPoint

DEFAULT_SPREAD = 1.5
DEFAULT_SPEED = 5.0
NOISE_STEP = 3.0


@dataclass
class _Group:
    members: List[str]
    center: np.ndarray
    velocity: np.ndarray
    spread: float


def _disk(rng, n: int, radius: float) -> np.ndarray:
    r = radius * np.sqrt(rng.random(n))
    a = rng.random(n) * 2 * np.pi
    return np.column_stack([r * np.cos(a), r * np.sin(a)])


def synth(script: dict, num_objects: Optional[int] = None, ticks: Optional[int] = None,
          seed: Optional[int] = None) -> List[TrajectoryPoint]:
    """Generate the points of a script, ordered by tick then object id."""
    seed = script.get("seed", 0) if seed is None else seed
    ticks = int(script.get("ticks", 20) if ticks is None else ticks)
    area = float(script.get("area", 2000.0))
    rng = np.random.default_rng(seed)

    forms = [dict(g, type="form", tick=g.get("tick", 0)) for g in script.get("groups", [])]
    events = sorted(forms + list(script.get("events", [])),
                    key=lambda e: (int(e["tick"]), e["type"] != "form"))
    scripted = sum(int(e.get("size", 0)) for e in forms + list(script.get("events", []))
                   if e["type"] == "form")
    total = script.get("objects", scripted) if num_objects is None else num_objects
    n_noise = max(int(total) - scripted, 0)

    pos: Dict[str, np.ndarray] = {}
    offsets: Dict[str, np.ndarray] = {}
    walkers: List[str] = []
    for i in range(n_noise):
        oid = f"n{i:04d}"
        pos[oid] = rng.random(2) * area
        walkers.append(oid)
    groups: Dict[str, _Group] = {}

    def place(g: _Group, fresh: List[str]):
        for oid, off in zip(fresh, _disk(rng, len(fresh), g.spread)):
            offsets[oid] = off

    out: List[TrajectoryPoint] = []
    ev = 0
    for t in range(ticks):
        while ev < len(events) and int(events[ev]["tick"]) == t:
            _apply(events[ev], groups, walkers, place, rng)
            ev += 1
        for g in groups.values():
            jitter = rng.normal(0.0, 0.05 * g.spread, size=(len(g.members), 2))
            for oid, j in zip(g.members, jitter):
                pos[oid] = g.center + offsets[oid] + j
        for oid in walkers:
            pos[oid] = pos.get(oid, rng.random(2) * area)
        present = sorted(set(walkers) | {m for g in groups.values() for m in g.members})
        for oid in present:
            x, y = pos[oid]
            out.append(TrajectoryPoint(oid, t, float(x), float(y)))
        for g in groups.values():
            g.center = g.center + g.velocity
        steps = rng.normal(0.0, NOISE_STEP, size=(len(walkers), 2))
        for oid, s in zip(walkers, steps):
            pos[oid] = pos[oid] + s
    return out


def _apply(e: dict, groups: Dict[str, _Group], walkers: List[str], place, rng) -> None:
    kind = e["type"]
    if kind == "form":
        name = e["name"]
        members = [f"{name}{i:03d}" for i in range(int(e["size"]))]
        g = _Group(members, np.asarray(e.get("at", (0.0, 0.0)), dtype=float),
                   np.asarray(e.get("velocity", (DEFAULT_SPEED, 0.0)), dtype=float),
                   float(e.get("spread", DEFAULT_SPREAD)))
        place(g, members)
        groups[name] = g
    elif kind == "travel":
        groups[e["group"]].velocity = np.asarray(e["velocity"], dtype=float)
    elif kind == "split":
        src = groups.pop(e["group"])
        names = list(e["into"])
        sizes = e.get("sizes")
        if sizes is None:
            base, extra = divmod(len(src.members), len(names))
            sizes = [base + (1 if i < extra else 0) for i in range(len(names))]
        vels = e.get("velocities", [src.velocity] * len(names))
        start = 0
        for name, size, vel in zip(names, sizes, vels):
            part = src.members[start:start + size]
            start += size
            g = _Group(part, src.center.copy(), np.asarray(vel, dtype=float), src.spread)
            place(g, part)
            groups[name] = g
    elif kind == "merge":
        parts = [groups.pop(n) for n in e["groups"]]
        members = sorted(m for g in parts for m in g.members)
        center = np.mean([g.center for g in parts], axis=0)
        vel = np.asarray(e.get("velocity", np.mean([g.velocity for g in parts], axis=0)), dtype=float)
        g = _Group(members, center, vel, max(g.spread for g in parts))
        place(g, members)
        groups[e["into"]] = g
    elif kind == "disperse":
        g = groups.pop(e["group"])
        walkers.extend(g.members)
    else:
        raise ValueError(f"unknown event type {kind!r}")


def one_group_script(size: int = 6, ticks: int = 20, noise: int = 0, seed: int = 0) -> dict:
    return {"seed": seed, "ticks": ticks, "objects": size + noise,
            "groups": [{"name": "g", "size": size, "at": [0.0, 0.0]}]}
