"""Loop-free multigraphs, degree statistics, traversal and text I/O.

Vertices are the dense labels ``0..n-1``.  Edges are stored as a multiset of
unordered pairs with explicit multiplicity; :attr:`Graph.edge_array` expands the
multiplicity so that numeric code can treat every edge instance uniformly.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import GraphError

__all__ = [
    "Graph",
    "DegreeStats",
    "Orientation",
    "from_edge_list",
    "to_edge_list",
    "read_graph",
    "write_graph",
    "degree_stats",
    "components",
    "is_connected",
    "girth",
    "is_eulerian_orientable",
    "cartesian_product",
    "disjoint_union",
    "subdivide_edge",
    "bfs_order",
]


class Graph:
    """Immutable loop-free multigraph on vertices ``0..n-1``."""

    __slots__ = ("n", "_items", "__dict__")

    def __init__(self, n: int, edges: Iterable[Sequence[int]] = ()):
        if n < 0:
            raise GraphError(f"vertex count must be nonnegative, got {n}")
        mult: dict[tuple[int, int], int] = {}
        for e in edges:
            if len(e) == 2:
                u, v = e
                k = 1
            elif len(e) == 3:
                u, v, k = e
            else:
                raise GraphError(f"edge must be (u, v) or (u, v, mult), got {e!r}")
            u, v, k = int(u), int(v), int(k)
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) has an endpoint outside [0, {n})")
            if u == v:
                raise GraphError(f"loop at vertex {u}")
            if k < 1:
                raise GraphError(f"edge ({u}, {v}) has multiplicity {k} < 1")
            key = (u, v) if u < v else (v, u)
            mult[key] = mult.get(key, 0) + k
        self.n = n
        self._items: tuple[tuple[tuple[int, int], int], ...] = tuple(sorted(mult.items()))

    # -- basic views --------------------------------------------------------

    @property
    def edge_items(self) -> tuple[tuple[tuple[int, int], int], ...]:
        """Distinct edges ``((u, v), mult)`` with ``u < v``, sorted."""
        return self._items

    @cached_property
    def num_edges(self) -> int:
        """Edge count with multiplicity, ``|E|``."""
        return sum(k for _, k in self._items)

    @cached_property
    def edge_array(self) -> np.ndarray:
        """``(|E|, 2)`` int array of edge instances, multiplicity expanded."""
        rows = [uv for uv, k in self._items for _ in range(k)]
        arr = np.array(rows, dtype=np.int64).reshape(-1, 2)
        arr.flags.writeable = False
        return arr

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        for (u, v), k in self._items:
            deg[u] += k
            deg[v] += k
        deg.flags.writeable = False
        return deg

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        """Per-vertex neighbour lists with multiplicity expanded."""
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for (u, v), k in self._items:
            adj[u].extend([v] * k)
            adj[v].extend([u] * k)
        return tuple(tuple(a) for a in adj)

    @cached_property
    def is_simple(self) -> bool:
        return all(k == 1 for _, k in self._items)

    def multiplicity(self, u: int, v: int) -> int:
        key = (u, v) if u < v else (v, u)
        return dict(self._items).get(key, 0)

    @cached_property
    def laplacian(self) -> np.ndarray:
        L = np.zeros((self.n, self.n), dtype=np.int64)
        for (u, v), k in self._items:
            L[u, v] -= k
            L[v, u] -= k
            L[u, u] += k
            L[v, v] += k
        L.flags.writeable = False
        return L

    # -- value semantics ----------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self._items == other._items

    def __hash__(self) -> int:
        return hash((self.n, self._items))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, |E|={self.num_edges})"


@dataclass(frozen=True)
class DegreeStats:
    d_min: int
    d_max: int
    d_mean: float
    d_geo: float
    d_harm: float


@dataclass(frozen=True)
class Orientation:
    """Direction of every edge instance of ``graph``.

    ``forward[i]`` is True when instance ``i`` of :attr:`Graph.edge_array` is
    oriented from its first to its second column.
    """

    graph: Graph
    forward: np.ndarray

    def __post_init__(self):
        if len(self.forward) != self.graph.num_edges:
            raise GraphError("orientation length does not match edge count")

    @cached_property
    def out_degrees(self) -> np.ndarray:
        e = self.graph.edge_array
        f = np.asarray(self.forward, dtype=bool)
        tails = np.where(f, e[:, 0], e[:, 1])
        return np.bincount(tails, minlength=self.graph.n)

    @cached_property
    def in_degrees(self) -> np.ndarray:
        return self.graph.degrees - self.out_degrees

    @property
    def imbalance(self) -> np.ndarray:
        return self.out_degrees - self.in_degrees

    def is_eulerian(self) -> bool:
        return bool(np.all(self.imbalance == 0))


# -- text format -------------------------------------------------------------


def from_edge_list(text: str) -> Graph:
    """Parse the ``"n m"`` header + ``"u v [mult]"`` lines format."""
    header = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            nums = [int(p) for p in parts]
        except ValueError:
            raise GraphError(f"line {lineno}: expected integers, got {raw!r}") from None
        if header is None:
            if len(nums) != 2 or nums[0] < 0 or nums[1] < 0:
                raise GraphError(f"line {lineno}: header must be 'n m'")
            header = nums
            continue
        if len(nums) not in (2, 3):
            raise GraphError(f"line {lineno}: expected 'u v' or 'u v mult'")
        u, v = nums[0], nums[1]
        k = nums[2] if len(nums) == 3 else 1
        n = header[0]
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"line {lineno}: vertex index out of range [0, {n})")
        if u == v:
            raise GraphError(f"line {lineno}: loop at vertex {u}")
        if k < 1:
            raise GraphError(f"line {lineno}: multiplicity must be >= 1")
        edges.append((u, v, k))
    if header is None:
        raise GraphError("empty graph file (missing 'n m' header)")
    if len(edges) != header[1]:
        raise GraphError(f"header announces {header[1]} edge lines, found {len(edges)}")
    return Graph(header[0], edges)


def to_edge_list(g: Graph) -> str:
    lines = [f"{g.n} {len(g.edge_items)}"]
    for (u, v), k in g.edge_items:
        lines.append(f"{u} {v}" if k == 1 else f"{u} {v} {k}")
    return "\n".join(lines) + "\n"


def read_graph(path) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return from_edge_list(fh.read())


def write_graph(g: Graph, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(to_edge_list(g))


# -- statistics and traversal ------------------------------------------------


def degree_stats(g: Graph) -> DegreeStats:
    if g.n == 0:
        raise GraphError("degree statistics of the empty graph")
    d = g.degrees
    if np.any(d == 0):
        raise GraphError(f"isolated vertex {int(np.argmin(d))}")
    df = d.astype(float)
    return DegreeStats(
        d_min=int(d.min()),
        d_max=int(d.max()),
        d_mean=float(df.mean()),
        d_geo=float(np.exp(np.log(df).mean())),
        d_harm=float(g.n / np.sum(1.0 / df)),
    )


def components(g: Graph) -> list[list[int]]:
    seen = [False] * g.n
    out = []
    for s in range(g.n):
        if seen[s]:
            continue
        seen[s] = True
        comp = [s]
        stack = [s]
        while stack:
            u = stack.pop()
            for w in g.adjacency[u]:
                if not seen[w]:
                    seen[w] = True
                    comp.append(w)
                    stack.append(w)
        out.append(sorted(comp))
    return out


def is_connected(g: Graph) -> bool:
    return g.n > 0 and len(components(g)) == 1


def girth(g: Graph) -> int | None:
    """Shortest cycle length; 2 for a repeated edge, ``None`` for a forest."""
    if not g.is_simple:
        return 2
    best = math.inf
    adj = [sorted(set(a)) for a in g.adjacency]
    for root in range(g.n):
        dist = [-1] * g.n
        parent = [-1] * g.n
        dist[root] = 0
        q = deque([root])
        while q:
            u = q.popleft()
            if 2 * dist[u] + 1 >= best:
                break
            for w in adj[u]:
                if dist[w] < 0:
                    dist[w] = dist[u] + 1
                    parent[w] = u
                    q.append(w)
                elif w != parent[u]:
                    best = min(best, dist[u] + dist[w] + 1)
    return None if best is math.inf else int(best)


def is_eulerian_orientable(g: Graph) -> bool:
    d = g.degrees
    return bool(g.n > 0 and np.all(d > 0) and np.all(d % 2 == 0))


def bfs_order(g: Graph, start: int = 0) -> list[int]:
    """Breadth-first vertex order covering every component."""
    seen = [False] * g.n
    order = []
    for s in [start] + list(range(g.n)):
        if s >= g.n or seen[s]:
            continue
        seen[s] = True
        q = deque([s])
        while q:
            u = q.popleft()
            order.append(u)
            for w in g.adjacency[u]:
                if not seen[w]:
                    seen[w] = True
                    q.append(w)
    return order


# -- constructions -----------------------------------------------------------


def cartesian_product(g: Graph, h: Graph) -> Graph:
    """``g □ h`` with vertex ``(u, v)`` labelled ``u * h.n + v``."""
    if not (g.is_simple and h.is_simple):
        raise GraphError("cartesian_product requires simple graphs")
    m = h.n
    edges = []
    for u in range(g.n):
        for (a, b), _ in h.edge_items:
            edges.append((u * m + a, u * m + b))
    for (a, b), _ in g.edge_items:
        for v in range(m):
            edges.append((a * m + v, b * m + v))
    return Graph(g.n * m, edges)


def disjoint_union(g: Graph, h: Graph) -> Graph:
    shift = g.n
    edges = [(u, v, k) for (u, v), k in g.edge_items]
    edges += [(u + shift, v + shift, k) for (u, v), k in h.edge_items]
    return Graph(g.n + h.n, edges)


def subdivide_edge(g: Graph, e: Sequence[int]) -> Graph:
    """Split one instance of edge ``e`` with a new vertex labelled ``g.n``."""
    u, v = int(e[0]), int(e[1])
    if g.multiplicity(u, v) == 0:
        raise GraphError(f"edge ({u}, {v}) not in graph")
    key = (u, v) if u < v else (v, u)
    edges = []
    for uv, k in g.edge_items:
        if uv == key:
            k -= 1
        if k:
            edges.append((*uv, k))
    w = g.n
    edges += [(u, w), (w, v)]
    return Graph(g.n + 1, edges)
