"""Graph families: cycles, cliques, hypercubes, periodic lattices and random graphs.

Vertex numbering is documented per constructor so that tables computed from
these graphs are reproducible.  Randomised constructors take an explicit seed
and draw from a counter-based Philox stream; no module-level RNG state exists.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import GraphError
from .graph import Graph, cartesian_product

__all__ = [
    "LatticeSpec",
    "SwitchTrace",
    "make",
    "parse_spec",
    "cycle",
    "clique",
    "hypercube",
    "torus",
    "triangular_torus",
    "ice_ic",
    "ice_ih",
    "clique_cycle",
    "symmetry_generators",
    "random_switchings",
    "random_regular",
    "rng_for",
]

FAMILIES = (
    "cycle",
    "clique",
    "hypercube",
    "torus",
    "triangular_torus",
    "ice_ic",
    "ice_ih",
    "clique_cycle",
)


def rng_for(seed: int, *stream: int) -> np.random.Generator:
    """Philox generator keyed by ``seed`` and an optional stream index."""
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    key = [seed, *[int(s) & 0xFFFFFFFFFFFFFFFF for s in stream]]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


# -- deterministic families --------------------------------------------------


def cycle(n: int) -> Graph:
    """``C_n`` with edges ``i -- i+1 (mod n)``."""
    if n < 3:
        raise GraphError(f"cycle length must be >= 3, got {n}")
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def clique(m: int) -> Graph:
    if m < 1:
        raise GraphError(f"clique size must be >= 1, got {m}")
    return Graph(m, itertools.combinations(range(m), 2))


def hypercube(d: int) -> Graph:
    """``Q_d``; vertex ``x`` is adjacent to ``x ^ (1 << i)``."""
    if d < 1:
        raise GraphError(f"hypercube dimension must be >= 1, got {d}")
    n = 1 << d
    return Graph(n, [(x, x ^ (1 << i)) for x in range(n) for i in range(d) if x < x ^ (1 << i)])


def torus(lengths) -> Graph:
    """Iterated Cartesian product of cycles, row-major vertex order."""
    lengths = list(lengths)
    if not lengths:
        raise GraphError("torus needs at least one cycle length")
    return reduce(cartesian_product, [cycle(m) for m in lengths])


def triangular_torus(a: int, b: int) -> Graph:
    """``a x b`` periodic triangular lattice (6-regular).

    Vertex ``(i, j)`` is ``i * b + j``; it joins ``(i+1, j)``, ``(i, j+1)`` and
    the diagonal ``(i+1, j+1)``.
    """
    if a < 3 or b < 3:
        raise GraphError("triangular torus needs a, b >= 3")
    edges = []
    for i in range(a):
        for j in range(b):
            v = i * b + j
            edges.append((v, ((i + 1) % a) * b + j))
            edges.append((v, i * b + (j + 1) % b))
            edges.append((v, ((i + 1) % a) * b + (j + 1) % b))
    return Graph(a * b, edges)


def _periodic_crystal(lattice: np.ndarray, basis: np.ndarray, bond: float, k: int) -> Graph:
    """Bond graph of ``k^3`` unit cells with periodic wrap.

    Bond templates (atom a in the home cell to atom b in a neighbouring cell)
    are found geometrically once, then replicated over all cells.  Vertex
    ``((cx * k + cy) * k + cz) * len(basis) + atom``.
    """
    nb = len(basis)
    cart = basis @ lattice
    templates = []
    for a in range(nb):
        for b in range(a + 1, nb):
            for off in itertools.product((-1, 0, 1), repeat=3):
                d = cart[b] + np.asarray(off) @ lattice - cart[a]
                if abs(np.linalg.norm(d) - bond) < 1e-6:
                    templates.append((a, b, off))

    def idx(c, atom):
        cx, cy, cz = (ci % k for ci in c)
        return ((cx * k + cy) * k + cz) * nb + atom

    edges = []
    for c in itertools.product(range(k), repeat=3):
        for a, b, off in templates:
            edges.append((idx(c, a), idx((c[0] + off[0], c[1] + off[1], c[2] + off[2]), b)))
    return Graph(k**3 * nb, edges)


def ice_ic(k: int) -> Graph:
    """Cubic ice (diamond lattice) on ``k^3`` conventional cells, 8 atoms each.

    For ``k = 1`` the periodic wrap produces repeated edges.
    """
    if k < 1:
        raise GraphError("ice_ic needs k >= 1")
    fcc = np.array([[0, 0, 0], [0, 0.5, 0.5], [0.5, 0, 0.5], [0.5, 0.5, 0]])
    basis = np.vstack([fcc, fcc + 0.25])
    return _periodic_crystal(np.eye(3), basis, np.sqrt(3) / 4, k)


def ice_ih(k: int) -> Graph:
    """Hexagonal ice (lonsdaleite) on ``k^3`` hexagonal cells, 4 atoms each.

    Ideal axial ratio ``c/a = sqrt(8/3)`` and internal parameter ``u = 3/8``, so
    all four bonds at every atom have equal length.
    """
    if k < 1:
        raise GraphError("ice_ih needs k >= 1")
    c = np.sqrt(8 / 3)
    lattice = np.array([[1.0, 0, 0], [-0.5, np.sqrt(3) / 2, 0], [0, 0, c]])
    basis = np.array(
        [[1 / 3, 2 / 3, 0], [2 / 3, 1 / 3, 0.5], [1 / 3, 2 / 3, 3 / 8], [2 / 3, 1 / 3, 7 / 8]]
    )
    return _periodic_crystal(lattice, basis, 3 * c / 8, k)


def clique_cycle(m: int, ell: int) -> Graph:
    """``K_m □ C_ell``; vertex ``(u, v)`` of the clique/cycle pair is ``u * ell + v``."""
    if m < 3 or m % 2 == 0:
        raise GraphError(f"clique_cycle needs odd m >= 3, got {m}")
    if ell < 3:
        raise GraphError(f"clique_cycle needs ell >= 3, got {ell}")
    return cartesian_product(clique(m), cycle(ell))


@dataclass(frozen=True)
class LatticeSpec:
    family: str
    params: tuple[int, ...] = ()

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise GraphError(f"unknown family {self.family!r}")
        object.__setattr__(self, "params", tuple(int(p) for p in self.params))


_ARITY = {
    "cycle": 1,
    "clique": 1,
    "hypercube": 1,
    "triangular_torus": 2,
    "ice_ic": 1,
    "ice_ih": 1,
    "clique_cycle": 2,
}


def make(spec: LatticeSpec) -> Graph:
    f, p = spec.family, spec.params
    if f == "torus":
        return torus(p)
    if len(p) != _ARITY[f]:
        raise GraphError(f"{f} takes {_ARITY[f]} parameter(s), got {len(p)}")
    return {
        "cycle": cycle,
        "clique": clique,
        "hypercube": hypercube,
        "triangular_torus": triangular_torus,
        "ice_ic": ice_ic,
        "ice_ih": ice_ih,
        "clique_cycle": clique_cycle,
    }[f](*p)


_ALIASES = {
    "triangular": "triangular_torus",
    "ice-ic": "ice_ic",
    "ice-ih": "ice_ih",
    "clique-cycle": "clique_cycle",
    "triangular-torus": "triangular_torus",
}


def parse_spec(tokens) -> LatticeSpec:
    """``["torus", "16", "16"]`` or ``"torus:16,16"`` -> :class:`LatticeSpec`."""
    if isinstance(tokens, str):
        name, _, rest = tokens.partition(":")
        tokens = [name] + [t for t in rest.replace(",", " ").split() if t]
    name = _ALIASES.get(tokens[0], tokens[0])
    try:
        params = tuple(int(t) for t in tokens[1:])
    except ValueError:
        raise GraphError(f"non-integer parameter in {tokens!r}") from None
    return LatticeSpec(name, params)


# -- symmetry ----------------------------------------------------------------


def _cycle_gens(m: int) -> list[list[int]]:
    rot = [(i + 1) % m for i in range(m)]
    ref = [(-i) % m for i in range(m)]
    return [rot, ref]


def _lift(gens_g, gens_h, ng: int, nh: int) -> list[list[int]]:
    out = []
    for p in gens_g:
        out.append([p[u] * nh + v for u in range(ng) for v in range(nh)])
    for p in gens_h:
        out.append([u * nh + p[v] for u in range(ng) for v in range(nh)])
    return out


def symmetry_generators(spec: LatticeSpec) -> list[list[int]]:
    """Automorphism generators for the families whose symmetry is obvious.

    Permutations map vertex ``v`` to ``perm[v]``.  Families without a supplied
    group return ``[]`` (transfer matrices then use complement-only orbits).
    """
    f, p = spec.family, spec.params
    if f == "cycle":
        return _cycle_gens(p[0])
    if f == "clique":
        m = p[0]
        if m < 2:
            return []
        swap = list(range(m))
        swap[0], swap[1] = 1, 0
        return [swap, [(i + 1) % m for i in range(m)]]
    if f == "torus":
        lengths = list(p)
        gens: list[list[int]] = _cycle_gens(lengths[0])
        n = lengths[0]
        for m in lengths[1:]:
            gens = _lift(gens, _cycle_gens(m), n, m)
            n *= m
        # swaps of equal adjacent factors in row-major coordinates
        strides = [int(np.prod(lengths[i + 1 :])) for i in range(len(lengths))]
        for i in range(len(lengths) - 1):
            if lengths[i] == lengths[i + 1]:
                perm = []
                for v in range(n):
                    coords = [(v // s) % L for s, L in zip(strides, lengths)]
                    coords[i], coords[i + 1] = coords[i + 1], coords[i]
                    perm.append(sum(c * s for c, s in zip(coords, strides)))
                gens.append(perm)
        return gens
    return []


# -- random graphs -----------------------------------------------------------


@dataclass(frozen=True)
class SwitchTrace:
    seed: int
    requested: int
    applied: int


def random_switchings(g: Graph, count: int, seed: int) -> tuple[Graph, SwitchTrace]:
    """Apply ``count`` attempted switchings ``{ab, cd} -> {ac, bd}``.

    Each attempt picks two distinct edges uniformly and a random orientation of
    the second; attempts that would share a vertex, create a loop or a repeated
    edge are counted but not retried.
    """
    if not g.is_simple:
        raise GraphError("random_switchings requires a simple graph")
    edges = [list(uv) for uv, _ in g.edge_items]
    if len(edges) < 2:
        raise GraphError("random_switchings needs at least 2 edges")
    present = {tuple(e) for e in edges}
    rng = rng_for(seed)
    ne = len(edges)
    applied = 0
    for _ in range(count):
        i, j = rng.choice(ne, size=2, replace=False)
        a, b = edges[i]
        c, d = edges[j]
        if rng.integers(2):
            c, d = d, c
        if len({a, b, c, d}) < 4:
            continue
        ac = (a, c) if a < c else (c, a)
        bd = (b, d) if b < d else (d, b)
        if ac in present or bd in present:
            continue
        present.discard(tuple(edges[i]))
        present.discard(tuple(edges[j]))
        present.add(ac)
        present.add(bd)
        edges[i] = list(ac)
        edges[j] = list(bd)
        applied += 1
    return Graph(g.n, edges), SwitchTrace(seed=int(seed), requested=int(count), applied=applied)


def random_regular(n: int, d: int, seed: int, max_restarts: int = 100_000) -> Graph:
    """Simple ``d``-regular graph from the pairing model with restarts."""
    if d < 0 or d >= n or (n * d) % 2:
        raise GraphError(f"no simple {d}-regular graph on {n} vertices")
    rng = rng_for(seed)
    points = np.repeat(np.arange(n), d)
    for _ in range(max_restarts):
        perm = rng.permutation(points).reshape(-1, 2)
        u = np.minimum(perm[:, 0], perm[:, 1])
        v = np.maximum(perm[:, 0], perm[:, 1])
        if np.any(u == v):
            continue
        keys = u * n + v
        if len(np.unique(keys)) != len(keys):
            continue
        return Graph(n, zip(u.tolist(), v.tolist()))
    raise GraphError(f"pairing model failed after {max_restarts} restarts")
