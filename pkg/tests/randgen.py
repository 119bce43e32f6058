"""Seeded random instances for oracle and equivalence checks."""

import numpy as np

from evogroup.model import Params, SnapshotCluster


def random_params(rng, max_w=6, objects=12):
    w = int(rng.integers(2, max_w + 1))
    k_c = int(rng.integers(1, w + 1))
    m_c = int(rng.integers(1, 4))
    k_p = int(rng.integers(1, k_c + 1))
    m_p = int(rng.integers(1, m_c + 1))
    return Params(w=w, k_c=k_c, m_c=m_c, d=float(rng.uniform(0.5, 3.0)), k_p=k_p, m_p=m_p,
                  m_g=float(rng.uniform(0.3, 1.0)), k_g=int(rng.integers(1, 4)),
                  eps=1.0, min_pts=1)


def random_cluster(rng, t, idx, pool, m_c, box=8.0, spread=1.5):
    size = int(rng.integers(m_c, min(len(pool), m_c + 4) + 1))
    members = sorted(rng.choice(pool, size=size, replace=False).tolist())
    center = rng.uniform(0, box, size=2)
    coords = center + rng.uniform(-spread, spread, size=(size, 2)) * rng.uniform(0.1, 1.0)
    return SnapshotCluster.from_points(idx, t, members, coords)


def random_stream(rng, ticks, max_clusters, objects=12, m_c=1, box=8.0, origin=0):
    pool = np.array([f"o{i:02d}" for i in range(objects)])
    out = {}
    for t in range(origin, origin + ticks):
        n = int(rng.integers(0, max_clusters + 1))
        out[t] = [random_cluster(rng, t, i, pool, m_c, box) for i in range(n)]
    return out
