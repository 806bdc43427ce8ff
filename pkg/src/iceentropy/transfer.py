"""Transfer matrices for ``lim_{l -> inf} rho(G □ C_l)``.

Layer states are bit vectors ``x`` in ``{0,1}^n``: bit ``v`` is set when the
cross edge entering copy ``v`` of the fiber from the previous layer points
forward.  With ``y`` the state of the next layer, the fiber edges must absorb
an imbalance of ``2 (y - x)``, so ``T[x, y] = N_G(2 (y - x))``.

``T`` commutes with the coordinate action of the fiber's automorphisms and with
global complement, so it is collapsed to orbit sums ``S[i, j] = sum_{y in O_j}
T[x_i, y]`` for one representative ``x_i`` per orbit.  ``S`` and ``T`` share
their Perron root.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .eo_exact import CensusTable, orientation_census
from .errors import ConvergenceError, GraphError, ResourceLimitError
from .graph import Graph, is_connected, is_eulerian_orientable

log = logging.getLogger(__name__)

__all__ = [
    "MAX_ORBIT_N",
    "MAX_MATRIX_N",
    "TransferSystem",
    "check_automorphism",
    "orbit_partition",
    "build",
    "leading_eigenvalue",
    "rho_product_cycle_limit",
    "dense_transfer_matrix",
]

MAX_ORBIT_N = 24
MAX_MATRIX_N = 16


def check_automorphism(g: Graph, perm) -> None:
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(g.n)):
        raise GraphError("generator is not a permutation of the fiber vertices")
    image = Graph(g.n, [(perm[u], perm[v], k) for (u, v), k in g.edge_items])
    if image != g:
        raise GraphError(f"generator {perm} is not an automorphism of the fiber")


def _permute_states(states: np.ndarray, perm) -> np.ndarray:
    out = np.zeros_like(states)
    for v, pv in enumerate(perm):
        out |= ((states >> v) & 1) << pv
    return out


def orbit_partition(n: int, generators) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Orbits of ``{0,1}^n`` under the generated coordinate group plus complement.

    Returns ``(orbit_id, reps, sizes)``; orbits are numbered by increasing
    smallest member, which is also the representative.
    """
    if n > MAX_ORBIT_N:
        raise ResourceLimitError(f"orbit enumeration limited to n <= {MAX_ORBIT_N}")
    N = 1 << n
    states = np.arange(N, dtype=np.int64)
    images = [states ^ (N - 1)] + [_permute_states(states, p) for p in generators]
    rows = np.concatenate([states] * len(images))
    cols = np.concatenate(images)
    adj = sp.coo_matrix((np.ones(rows.size, dtype=np.int8), (rows, cols)), shape=(N, N)).tocsr()
    _, labels = connected_components(adj, directed=True, connection="weak")
    # relabel by smallest member
    first = np.full(labels.max() + 1, N, dtype=np.int64)
    np.minimum.at(first, labels, states)
    order = np.argsort(first)
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    orbit_id = rank[labels]
    reps = first[order]
    sizes = np.bincount(orbit_id)
    return orbit_id, reps, sizes


def _pow3_table(n: int) -> np.ndarray:
    """``P[mask] = sum_{v in mask} 3**v`` for every mask."""
    P = np.zeros(1 << n, dtype=np.int64)
    for v in range(n):
        half = 1 << v
        P[half : 2 * half] = P[:half] + 3**v
    return P


def _row(x: int, census: CensusTable, P3: np.ndarray, flips: np.ndarray):
    """Nonzero entries ``(y, T[x, y])`` of one transfer-matrix row."""
    full = flips.size - 1
    base = int(P3[full])  # code of z = 0
    code = base + P3[flips & (~x & full)] - P3[flips & x]
    vals = census.lookup(code)
    nz = np.flatnonzero(vals)
    return x ^ flips[nz], vals[nz]


def dense_transfer_matrix(fiber: Graph, census: CensusTable | None = None) -> np.ndarray:
    """Full ``2^n x 2^n`` matrix ``T`` (small fibers only)."""
    n = fiber.n
    if n > 12:
        raise ResourceLimitError("dense transfer matrix limited to n <= 12")
    census = census or orientation_census(fiber)
    P3 = _pow3_table(n)
    flips = np.arange(1 << n, dtype=np.int64)
    T = np.zeros((1 << n, 1 << n), dtype=np.int64)
    for x in range(1 << n):
        y, vals = _row(x, census, P3, flips)
        T[x, y] = vals
    return T


@dataclass(frozen=True)
class TransferSystem:
    fiber: Graph
    generators: tuple
    orbit_id: np.ndarray
    reps: np.ndarray
    sizes: np.ndarray
    s_matrix: sp.csr_matrix | None = None
    lam: float | None = None

    @property
    def n(self) -> int:
        return self.fiber.n

    @property
    def n_orbits(self) -> int:
        return int(self.reps.size)

    @property
    def rho_limit(self) -> float:
        if self.lam is None:
            raise ValueError("eigenvalue not computed")
        return math.log(self.lam) / self.n


def _s_rows(reps, orbit_id, census, n):
    P3 = _pow3_table(n)
    flips = np.arange(1 << n, dtype=np.int64)
    k = reps.size
    rows, cols, vals = [], [], []
    for i, x in enumerate(reps.tolist()):
        y, t = _row(x, census, P3, flips)
        acc = np.zeros(k, dtype=np.int64)
        np.add.at(acc, orbit_id[y], t)
        j = np.flatnonzero(acc)
        rows.append(np.full(j.size, i, dtype=np.int64))
        cols.append(j)
        vals.append(acc[j])
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)


def build(
    fiber: Graph,
    generators=(),
    matrix: bool = True,
    validate: str = "sample",
    tol: float = 1e-12,
) -> TransferSystem:
    """Orbits, collapsed matrix ``S`` and its Perron root for ``fiber □ C_inf``.

    ``validate`` is ``"full"`` (every orbit member must give the same orbit
    sums), ``"sample"`` (the largest member of each orbit is checked against
    the representative) or ``"none"``.
    """
    if not is_eulerian_orientable(fiber):
        raise GraphError("transfer fiber must have positive even degrees")
    if not is_connected(fiber):
        raise GraphError("transfer fiber must be connected")
    gens = tuple(tuple(int(p) for p in g) for g in generators)
    for g in gens:
        check_automorphism(fiber, g)
    n = fiber.n
    orbit_id, reps, sizes = orbit_partition(n, gens)
    if not matrix:
        return TransferSystem(fiber, gens, orbit_id, reps, sizes)
    if n > MAX_MATRIX_N:
        raise ResourceLimitError(f"collapsed transfer matrix limited to n <= {MAX_MATRIX_N}")
    census = orientation_census(fiber)
    r, c, v = _s_rows(reps, orbit_id, census, n)
    k = reps.size
    S = sp.csr_matrix((v, (r, c)), shape=(k, k), dtype=np.int64)

    if validate != "none":
        if validate == "full":
            members = np.arange(1 << n, dtype=np.int64)
        else:
            last = np.zeros(k, dtype=np.int64)
            np.maximum.at(last, orbit_id, np.arange(1 << n, dtype=np.int64))
            members = last[last != reps]
        if members.size:
            mr, mc, mv = _s_rows(members, orbit_id, census, n)
            M = sp.csr_matrix((mv, (mr, mc)), shape=(members.size, k), dtype=np.int64)
            ref = S[orbit_id[members]]
            if (M != ref).nnz:
                raise AssertionError("orbit sums differ between members of one orbit")

    lam = leading_eigenvalue(S, tol=tol)
    return TransferSystem(fiber, gens, orbit_id, reps, sizes, S, lam)


def leading_eigenvalue(S, tol: float = 1e-12, max_iter: int = 200_000) -> float:
    """Perron root by power iteration from the all-ones vector.

    Stops when successive Rayleigh quotients agree to ``tol`` (relative) and the
    eigen-residual is below ``sqrt(tol)``.
    """
    if isinstance(S, TransferSystem):
        S = S.s_matrix
    A = sp.csr_matrix(S, dtype=float)
    v = np.ones(A.shape[0]) / math.sqrt(A.shape[0])
    lam_prev = None
    for _ in range(max_iter):
        w = A @ v
        lam = float(v @ w)
        nw = np.linalg.norm(w)
        if nw == 0:
            raise ConvergenceError("transfer matrix annihilates the start vector")
        if lam_prev is not None and abs(lam - lam_prev) <= tol * abs(lam):
            if np.linalg.norm(w - lam * v) <= math.sqrt(tol) * abs(lam):
                return lam
        lam_prev = lam
        v = w / nw
    raise ConvergenceError(f"power iteration did not converge in {max_iter} steps")


def rho_product_cycle_limit(fiber: Graph, generators=(), tol: float = 1e-12) -> float:
    """``lim_{l->inf} rho(fiber □ C_l) = log(lambda) / n``."""
    return build(fiber, generators, tol=tol).rho_limit
