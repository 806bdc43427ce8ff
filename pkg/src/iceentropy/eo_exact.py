"""Exact counting of Eulerian orientations and related quantities.

The workhorse is a frontier dynamic programme over edge instances.  Edges are
processed in the order induced by a vertex order (BFS by default); a vertex is
"active" from its first processed edge until its last, and only active vertices
carry a partial imbalance (out-degree minus in-degree so far).  States are
packed into int64 codes, one radix-``2 d_max + 1`` digit per active slot, and
merged after every edge with a lexsort.  A state is dropped as soon as some
vertex can no longer reach one of its allowed final imbalances.

Finished vertices may optionally record their final imbalance (in
``{-2, 0, 2}``) as a base-3 digit; that yields the orientation census used by
the transfer matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb, factorial

import numpy as np

from ._accel import HAVE_NUMBA, jit
from ._trails import count_trails, count_trails_batch, end_incidence
from .errors import GraphError, ResourceLimitError
from .generators import clique
from .graph import Graph, bfs_order, is_eulerian_orientable

__all__ = [
    "MAX_SLOTS",
    "CensusTable",
    "eo_count",
    "eo_count_brute",
    "frontier_dp",
    "orientation_census",
    "census_brute",
    "rt",
    "partition_count",
    "partition_sum_exact",
    "perfect_matchings",
]

MAX_SLOTS = 22
_CODE_LIMIT = 1 << 62


def _edge_schedule(g: Graph, order):
    """Edge instances sorted by vertex order plus a slot assignment per vertex."""
    if order is None:
        order = bfs_order(g)
    pos = np.empty(g.n, dtype=np.int64)
    pos[np.asarray(order, dtype=np.int64)] = np.arange(g.n)
    e = g.edge_array
    if len(e):
        pe = pos[e]
        idx = np.lexsort((pe.min(axis=1), pe.max(axis=1)))
        e = e[idx]
    remaining = g.degrees.copy()
    slot = np.full(g.n, -1, dtype=np.int64)
    free: list[int] = []
    used = 0
    steps = []
    for u, v in e.tolist():
        for w in (u, v):
            if slot[w] < 0:
                if free:
                    slot[w] = free.pop()
                else:
                    slot[w] = used
                    used += 1
        remaining[u] -= 1
        remaining[v] -= 1
        steps.append((u, v, int(slot[u]), int(slot[v]), int(remaining[u]), int(remaining[v])))
        for w in (u, v):
            if remaining[w] == 0:
                free.append(int(slot[w]))
        free.sort(reverse=True)
    return steps, used


def _merge(active, done, counts):
    if active.size <= 1:
        return active, done, counts
    idx = np.lexsort((done, active))
    active, done, counts = active[idx], done[idx], counts[idx]
    new = np.empty(active.size, dtype=bool)
    new[0] = True
    new[1:] = (active[1:] != active[:-1]) | (done[1:] != done[:-1])
    starts = np.flatnonzero(new)
    return active[starts], done[starts], np.add.reduceat(counts, starts)


def frontier_dp(g: Graph, targets, order=None, record: bool = False, max_slots: int = MAX_SLOTS):
    """Count orientations whose final imbalance at ``v`` lies in ``targets[v]``.

    ``targets`` is a sequence of sets of even integers (one per vertex).
    Returns the total count when ``record`` is False, else ``(codes, counts)``
    where ``codes`` encodes the final imbalance vector ``z`` as
    ``sum((z_v // 2 + 1) * 3**v)`` (so every target must lie in {-2, 0, 2}).
    """
    n = g.n
    targets = [tuple(sorted(set(int(t) for t in ts))) for ts in targets]
    if len(targets) != n:
        raise GraphError("need one target set per vertex")
    if record:
        if n > 39:
            raise ResourceLimitError("census codes support at most 39 vertices")
        if any(t not in (-2, 0, 2) for ts in targets for t in ts):
            raise GraphError("recorded targets must lie in {-2, 0, 2}")
    deg = g.degrees
    steps, slots = _edge_schedule(g, order)
    dmax = int(deg.max()) if n else 0
    R = 2 * dmax + 1
    if slots > max_slots or (slots and R**slots >= _CODE_LIMIT):
        raise ResourceLimitError(
            f"frontier needs {slots} active slots of radix {R} (limit {max_slots} slots, 62 bits)"
        )
    dtype = np.int64 if g.num_edges <= 62 else object
    pw = [R**s for s in range(max(slots, 1))]
    zero = sum(dmax * p for p in pw[:slots])
    done0 = 0
    for v in range(n):
        if deg[v] == 0:
            if 0 not in targets[v]:
                return (np.zeros(0, np.int64), np.zeros(0, dtype)) if record else 0
            done0 += 3**v
    active = np.array([zero], dtype=np.int64)
    done = np.array([done0 if record else 0], dtype=np.int64)
    counts = np.array([1], dtype=dtype)

    for u, v, su, sv, ru, rv in steps:
        delta = pw[su] - pw[sv]
        active = np.concatenate([active + delta, active - delta])
        done = np.concatenate([done, done])
        counts = np.concatenate([counts, counts])
        keep = np.ones(active.size, dtype=bool)
        finished = []
        for w, s, r in ((u, su, ru), (v, sv, rv)):
            p = (active // pw[s]) % R - dmax
            ok = np.zeros(active.size, dtype=bool)
            for t in targets[w]:
                ok |= np.abs(t - p) <= r
            keep &= ok
            if r == 0:
                finished.append((w, s))
        active, done, counts = active[keep], done[keep], counts[keep]
        for w, s in finished:
            p = (active // pw[s]) % R - dmax
            if record:
                done = done + (p // 2 + 1) * 3**w
            active = active - p * pw[s]
        active, done, counts = _merge(active, done, counts)
        if active.size == 0:
            break

    if record:
        return done, counts
    return int(sum(counts.tolist()))


def eo_count(g: Graph, order=None, max_slots: int = MAX_SLOTS) -> int:
    """Exact number of Eulerian orientations (0 unless all degrees are even)."""
    if g.n == 0:
        return 1
    if np.any(g.degrees % 2):
        return 0
    return frontier_dp(g, [(0,)] * g.n, order=order, max_slots=max_slots)


def _all_orientations(g: Graph, chunk: int = 1 << 16):
    """Yield imbalance matrices for every orientation, in chunks."""
    E = g.num_edges
    e = g.edge_array
    inc = np.zeros((E, g.n), dtype=np.int64)
    inc[np.arange(E), e[:, 0]] += 1
    inc[np.arange(E), e[:, 1]] -= 1
    total = 1 << E
    bits = np.arange(E, dtype=np.int64)
    for lo in range(0, total, chunk):
        idx = np.arange(lo, min(lo + chunk, total), dtype=np.int64)
        signs = 2 * ((idx[:, None] >> bits) & 1) - 1
        yield signs @ inc


def eo_count_brute(g: Graph, max_edges: int = 26) -> int:
    """Enumerate all ``2^|E|`` orientations (test oracle)."""
    if g.num_edges > max_edges:
        raise ResourceLimitError(f"brute force limited to {max_edges} edges")
    return int(sum(int(np.sum(~np.any(z, axis=1))) for z in _all_orientations(g)))


@dataclass(frozen=True)
class CensusTable:
    """``N_G(z)`` for ``z`` in ``{-2,0,2}^n``; zero entries are not stored.

    ``codes`` is sorted; a vector ``z`` has code ``sum((z_v//2 + 1) * 3**v)``.
    """

    n: int
    codes: np.ndarray
    counts: np.ndarray

    @staticmethod
    def encode(z) -> int:
        return sum((int(zv) // 2 + 1) * 3**v for v, zv in enumerate(z))

    def decode(self, code: int) -> tuple[int, ...]:
        z = []
        for _ in range(self.n):
            code, d = divmod(int(code), 3)
            z.append(2 * d - 2)
        return tuple(z)

    def lookup(self, codes: np.ndarray) -> np.ndarray:
        """Vectorised ``N_G`` for an array of codes (0 where absent)."""
        codes = np.asarray(codes, dtype=np.int64)
        idx = np.searchsorted(self.codes, codes)
        idx = np.minimum(idx, max(self.codes.size - 1, 0))
        hit = self.codes.size > 0
        out = np.zeros(codes.shape, dtype=self.counts.dtype)
        if hit:
            m = self.codes[idx] == codes
            out[m] = self.counts[idx[m]]
        return out

    def __getitem__(self, z) -> int:
        if len(z) != self.n:
            raise KeyError(z)
        if any(int(x) not in (-2, 0, 2) for x in z):
            return 0
        return int(self.lookup(np.array([self.encode(z)]))[0])

    def __len__(self) -> int:
        return int(self.codes.size)

    def items(self):
        for c, k in zip(self.codes.tolist(), self.counts.tolist()):
            yield self.decode(c), int(k)

    def total(self) -> int:
        return int(sum(self.counts.tolist()))


def orientation_census(g: Graph, order=None, max_slots: int = MAX_SLOTS) -> CensusTable:
    if not is_eulerian_orientable(g):
        raise GraphError("orientation_census requires positive even degrees")
    codes, counts = frontier_dp(g, [(-2, 0, 2)] * g.n, order=order, record=True, max_slots=max_slots)
    idx = np.argsort(codes, kind="stable")
    return CensusTable(g.n, codes[idx], counts[idx])


def census_brute(g: Graph) -> dict[tuple[int, ...], int]:
    """Census by enumerating every orientation (test oracle)."""
    out: dict[tuple[int, ...], int] = {}
    for z in _all_orientations(g):
        z = z[np.all(np.abs(z) <= 2, axis=1)]
        keys, cnt = np.unique(z, axis=0, return_counts=True)
        for k, c in zip(map(tuple, keys.tolist()), cnt.tolist()):
            out[k] = out.get(k, 0) + c
    return out


# -- regular tournaments --------------------------------------------------------

RT_LIMIT = 25


def _distributions(classes, k):
    """All ways to pick ``j_c <= n_c`` from each class with ``sum j_c = k``."""
    if not classes:
        if k == 0:
            yield ()
        return
    (val, cnt), rest = classes[0], classes[1:]
    cap = sum(c for _, c in rest)
    for j in range(max(0, k - cap), min(cnt, k) + 1):
        for tail in _distributions(rest, k - j):
            yield (j,) + tail


@lru_cache(maxsize=None)
def _rt(m: int) -> int:
    # Remaining vertices are interchangeable, so states are multisets of
    # partial imbalances stored as sorted ((value, count), ...) tuples.
    states: dict[tuple, int] = {((0, m),): 1}
    for _ in range(m):
        nxt: dict[tuple, int] = {}
        for ms, w in states.items():
            first_val = ms[0][0]
            others = list(ms)
            if others[0][1] == 1:
                others.pop(0)
            else:
                others[0] = (first_val, others[0][1] - 1)
            r = sum(c for _, c in others)
            if (r - first_val) % 2 or not (0 <= (r - first_val) // 2 <= r):
                continue
            k = (r - first_val) // 2  # out-edges from the processed vertex
            for js in _distributions(others, k):
                mult = w
                new: dict[int, int] = {}
                for (val, cnt), j in zip(others, js):
                    mult *= comb(cnt, j)
                    if j:
                        new[val - 1] = new.get(val - 1, 0) + j
                    if cnt - j:
                        new[val + 1] = new.get(val + 1, 0) + cnt - j
                key = tuple(sorted(new.items()))
                nxt[key] = nxt.get(key, 0) + mult
        states = nxt
    return states.get((), 0)


def rt(m: int, limit: int = RT_LIMIT) -> int:
    """Number of regular tournaments on ``m`` vertices, ``EO(K_m)``."""
    if m < 1 or m % 2 == 0:
        raise GraphError(f"regular tournaments need odd m >= 1, got {m}")
    if m > limit:
        raise ResourceLimitError(f"exact RT limited to m <= {limit}")
    return _rt(m)


def rt_via_eo(m: int) -> int:
    """``eo_count(K_m)``, an independent route used to cross-check :func:`rt`."""
    return eo_count(clique(m))


# -- Eulerian partitions -----------------------------------------------------------


def partition_count(g: Graph) -> int:
    """Number of Eulerian partitions, prod d!/((d/2)! 2^(d/2))."""
    if np.any(g.degrees % 2):
        raise GraphError("partition_count requires even degrees")
    out = 1
    for d in g.degrees.tolist():
        out *= factorial(d) // (factorial(d // 2) * 2 ** (d // 2))
    return out


def perfect_matchings(items):
    """All perfect matchings of an even-length sequence, as lists of pairs."""
    items = list(items)
    if not items:
        yield []
        return
    a = items[0]
    for i in range(1, len(items)):
        rest = items[1:i] + items[i + 1 :]
        for m in perfect_matchings(rest):
            yield [(a, items[i])] + m


def _matching_tables(g: Graph):
    offsets, ends = end_incidence(g)
    tables = []
    for v in range(g.n):
        local = ends[offsets[v] : offsets[v + 1]].tolist()
        tables.append(np.array([[x for pair in m for x in pair] for m in perfect_matchings(local)], dtype=np.int64))
    return tables


@jit
def _enumerate_partitions(flat, starts, sizes, radices, hist):
    nv = radices.size
    L = hist.size * 2 - 2
    partner = np.empty(L, dtype=np.int64)
    stamp = np.zeros(L // 2, dtype=np.int64)
    digits = np.zeros(nv, dtype=np.int64)
    total = 1
    for v in range(nv):
        total *= radices[v]
    for idx in range(total):
        for v in range(nv):
            row = starts[v] + digits[v] * sizes[v]
            for i in range(0, sizes[v], 2):
                a = flat[row + i]
                b = flat[row + i + 1]
                partner[a] = b
                partner[b] = a
        hist[count_trails(partner, stamp, idx + 1)] += 1
        for v in range(nv):
            digits[v] += 1
            if digits[v] < radices[v]:
                break
            digits[v] = 0
    return hist


def partition_sum_exact(g: Graph, limit: int = 10**8) -> int:
    """Sum of ``2^|P|`` over every Eulerian partition ``P``, by enumeration."""
    if not is_eulerian_orientable(g):
        raise GraphError("partition_sum_exact requires positive even degrees")
    total = partition_count(g)
    if total > limit:
        raise ResourceLimitError(f"{total} partitions exceed the enumeration limit {limit}")
    tables = _matching_tables(g)
    hist = np.zeros(g.num_edges + 1, dtype=np.int64)
    if HAVE_NUMBA:
        flat = np.concatenate([t.ravel() for t in tables])
        sizes = np.array([t.shape[1] for t in tables], dtype=np.int64)
        radices = np.array([t.shape[0] for t in tables], dtype=np.int64)
        starts = np.zeros(g.n, dtype=np.int64)
        np.cumsum([t.size for t in tables[:-1]], out=starts[1:])
        _enumerate_partitions(flat, starts, sizes, radices, hist)
    else:
        hist = partition_trail_histogram(g, tables)
    return sum(int(c) << k for k, c in enumerate(hist.tolist()))


def _chunked_product(tables, chunk):
    """Yield per-vertex selected matching rows for chunks of the product space."""
    radices = [t.shape[0] for t in tables]
    total = int(np.prod(radices, dtype=object))
    for lo in range(0, total, chunk):
        idx = np.arange(lo, min(lo + chunk, total), dtype=np.int64)
        out = []
        for t, r in zip(tables, radices):
            idx, d = np.divmod(idx, r)
            out.append(t[d])
        yield out


def partition_trail_histogram(g: Graph, tables=None) -> np.ndarray:
    """Exact distribution of ``|P|`` over all partitions (count per trail number)."""
    if tables is None:
        tables = _matching_tables(g)
    hist = np.zeros(g.num_edges + 1, dtype=np.int64)
    L = 2 * g.num_edges
    for combo in _chunked_product(tables, 4096):
        partner = np.empty((combo[0].shape[0], L), dtype=np.int64)
        for sel in combo:
            a, b = sel[:, 0::2], sel[:, 1::2]
            np.put_along_axis(partner, a, b, axis=1)
            np.put_along_axis(partner, b, a, axis=1)
        hist += np.bincount(count_trails_batch(partner), minlength=hist.size)
    return hist

