"""Edge-end bookkeeping and closed-trail counting for Eulerian partitions.

Edge instance ``e`` of :attr:`Graph.edge_array` owns ends ``2e`` (at its first
vertex) and ``2e + 1`` (at its second).  An Eulerian partition is a
fixed-point-free involution ``partner`` on ends that pairs ends at the same
vertex; its trails are the cycles of the walk "cross the edge, then follow the
partner".
"""

from __future__ import annotations

import numpy as np

from ._accel import jit
from .graph import Graph

MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)
GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_INV53 = 1.0 / 9007199254740992.0


def end_incidence(g: Graph) -> tuple[np.ndarray, np.ndarray]:
    """CSR arrays ``(offsets, ends)`` listing the edge ends at each vertex."""
    e = g.edge_array
    owner = e.ravel()  # end 2i sits at e[i,0], end 2i+1 at e[i,1]
    order = np.argsort(owner, kind="stable")
    offsets = np.zeros(g.n + 1, dtype=np.int64)
    np.cumsum(np.bincount(owner, minlength=g.n), out=offsets[1:])
    return offsets, order.astype(np.int64)


@jit
def count_trails(partner, stamp, tag):
    """Number of closed trails; ``stamp`` is per-edge scratch marked with ``tag``."""
    ne = partner.size // 2
    trails = 0
    for e in range(ne):
        if stamp[e] == tag:
            continue
        trails += 1
        start = 2 * e
        cur = start
        while True:
            stamp[cur >> 1] = tag
            nxt = partner[cur ^ 1]
            if nxt == start:
                break
            cur = nxt
    return trails


def count_trails_batch(partner: np.ndarray) -> np.ndarray:
    """Vectorised trail counts for a ``(B, 2|E|)`` batch of partner arrays.

    The map ``end -> partner[end ^ 1]`` splits every trail into exactly two
    cycles, which are counted by min-label pointer doubling.
    """
    B, L = partner.shape
    flip = np.arange(L) ^ 1
    step = partner[:, flip]
    label = np.broadcast_to(np.arange(L), (B, L)).copy()
    span = 1
    while span < L:
        np.minimum(label, np.take_along_axis(label, step, axis=1), out=label)
        step = np.take_along_axis(step, step, axis=1)
        span *= 2
    cycles = np.count_nonzero(label == np.arange(L), axis=1)
    return cycles // 2


# -- counter-based random stream (splitmix64 finaliser) ------------------------


@jit
def mix64(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def mix64_np(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def batch_key(seed: int, batch: int) -> np.uint64:
    """Stream key for one batch; independent of how batches are sharded."""
    s = np.array([int(seed) & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    with np.errstate(over="ignore"):
        k = mix64_np(mix64_np(s + GOLDEN) + np.uint64(batch) * GOLDEN + np.uint64(1))
    return np.uint64(k[0])


def uniform_from_counter(key: np.uint64, counters: np.ndarray) -> np.ndarray:
    """Uniform doubles in [0, 1) for the given 0-based counters of stream ``key``."""
    c = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = mix64_np(key + (c + np.uint64(1)) * GOLDEN)
    return (z >> np.uint64(11)).astype(np.float64) * _INV53
