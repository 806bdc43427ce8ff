"""Spanning-tree counts, tree entropies and the closed-form lattice constants.

Exact counts use fraction-free (Bareiss) elimination on the reduced Laplacian
with Python integers.  Floating log-counts use a Cholesky factorisation of the
same matrix, which is positive definite for connected graphs.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from math import comb

import numpy as np

from ._accel import kernel
from .errors import GraphError, ResourceLimitError
from .graph import Graph, is_connected

log = logging.getLogger(__name__)

__all__ = [
    "EXACT_LIMIT",
    "TreeCount",
    "Spectrum",
    "bareiss_determinant",
    "tree_count_exact",
    "tree_entropy",
    "laplacian_spectrum",
    "product_spectrum",
    "tree_count_from_spectrum",
    "tube_tau_limit",
    "tau_limit_product_cycle",
    "catalan",
    "square_lattice_tau_limit",
    "cubic_lattice_tau_limit",
    "triangular_tau_limit",
    "ice_ic_tau",
    "clique_cycle_u",
    "clique_cycle_tree_count",
    "hypercube_tree_count",
    "hypercube_tau",
    "tau_random_regular",
]

EXACT_LIMIT = 400


@dataclass(frozen=True)
class TreeCount:
    log_value: float
    n: int
    exact: int | None = None

    @property
    def tau(self) -> float:
        return self.log_value / self.n


@dataclass(frozen=True)
class Spectrum:
    """Multiplicity-expanded Laplacian eigenvalues, sorted ascending."""

    eigenvalues: np.ndarray = field(repr=False)

    def __post_init__(self):
        ev = np.sort(np.asarray(self.eigenvalues, dtype=float))
        ev[np.abs(ev) < 1e-9] = 0.0
        if ev.size and ev[0] < 0:
            raise GraphError("Laplacian spectrum must be nonnegative")
        object.__setattr__(self, "eigenvalues", ev)

    def __len__(self) -> int:
        return self.eigenvalues.size

    @property
    def zero_count(self) -> int:
        return int(np.sum(self.eigenvalues == 0.0))


# -- exact counts ------------------------------------------------------------


def bareiss_determinant(rows) -> int:
    """Determinant of an integer matrix by fraction-free elimination."""
    M = [list(map(int, r)) for r in rows]
    n = len(M)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            for i in range(k + 1, n):
                if M[i][k] != 0:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return 0
        rk = M[k]
        akk = rk[k]
        tail = rk[k + 1 :]
        for i in range(k + 1, n):
            ri = M[i]
            aik = ri[k]
            if aik == 0:
                M[i] = ri[: k + 1] + [x * akk // prev for x in ri[k + 1 :]]
            else:
                M[i] = ri[: k + 1] + [
                    (x * akk - aik * y) // prev for x, y in zip(ri[k + 1 :], tail)
                ]
        prev = akk
    return sign * M[n - 1][n - 1]


def tree_count_exact(g: Graph, limit: int = EXACT_LIMIT) -> int:
    """``t(g)`` as a Python integer; 0 (with a warning) when disconnected."""
    if g.n > limit:
        raise ResourceLimitError(f"exact tree count limited to n <= {limit}, got {g.n}")
    if g.n == 0:
        return 0
    if not is_connected(g):
        log.warning("graph is disconnected; t(G) = 0")
        return 0
    L = g.laplacian[:-1, :-1]
    return bareiss_determinant(L.tolist())


def tree_entropy(g: Graph, exact: bool | None = None) -> TreeCount:
    """Natural log of ``t(g)`` via Cholesky; exact count attached for small n."""
    if not is_connected(g):
        raise GraphError("tree_entropy requires a connected graph")
    if g.n == 1:
        return TreeCount(0.0, 1, 1)
    L = g.laplacian[:-1, :-1].astype(float)
    chol = np.linalg.cholesky(L)
    logt = float(2.0 * np.sum(np.log(np.diag(chol))))
    if exact is None:
        exact = g.n <= EXACT_LIMIT
    t = tree_count_exact(g) if exact else None
    return TreeCount(logt, g.n, t)


# -- spectra -----------------------------------------------------------------


def laplacian_spectrum(g: Graph) -> Spectrum:
    return Spectrum(np.linalg.eigvalsh(g.laplacian.astype(float)))


def product_spectrum(a: Spectrum, b: Spectrum) -> Spectrum:
    """Spectrum of the Cartesian product: all pairwise sums."""
    return Spectrum((a.eigenvalues[:, None] + b.eigenvalues[None, :]).ravel())


def tree_count_from_spectrum(s: Spectrum) -> float:
    """``log t`` = log(product of nonzero eigenvalues / n); connected graphs only."""
    if s.zero_count != 1:
        raise GraphError("spectrum has %d zero eigenvalues; graph disconnected" % s.zero_count)
    nz = s.eigenvalues[s.eigenvalues > 0]
    return float(np.sum(np.log(nz)) - math.log(len(s)))


# -- limits of products with a long cycle -------------------------------------


def _cycle_limit_term(mu: np.ndarray) -> np.ndarray:
    # integral over [0,1] of log(mu + 2 - 2 cos 2 pi x)
    return np.log((mu + 2.0 + np.sqrt(mu * mu + 4.0 * mu)) / 2.0)


def tube_tau_limit(m: int) -> float:
    """``lim_{l->inf} tau(C_m □ C_l)``."""
    if m < 3:
        raise GraphError("tube_tau_limit needs m >= 3")
    y = 2 * np.pi * np.arange(1, m) / m
    c = np.cos(y)
    return float(np.sum(np.log(2 - c + np.sqrt(c * c - 4 * c + 3))) / m)


def tau_limit_product_cycle(h: Graph | Spectrum) -> float:
    """``lim_{l->inf} tau(h □ C_l)`` from the Laplacian spectrum of ``h``."""
    s = h if isinstance(h, Spectrum) else laplacian_spectrum(h)
    if s.zero_count != 1:
        raise GraphError("tau_limit_product_cycle needs a connected fiber")
    mu = s.eigenvalues[s.eigenvalues > 0]
    return float(np.sum(_cycle_limit_term(mu)) / len(s))


def catalan(tol: float = 1e-17) -> float:
    """Catalan's constant from ``pi/8 log(2+sqrt 3) + 3/8 sum 1/((2k+1)^2 C(2k,k))``."""
    s = 0.0
    k = 0
    while True:
        term = 1.0 / ((2 * k + 1) ** 2 * comb(2 * k, k))
        s += term
        if term < tol:
            break
        k += 1
    return math.pi / 8 * math.log(2 + math.sqrt(3)) + 3 / 8 * s


def square_lattice_tau_limit() -> float:
    return 4.0 / math.pi * catalan()


# -- triple integrals ---------------------------------------------------------


def _np_grid_mean_cubic(c):
    a = c[:, None] + c[None, :]
    tot = 0.0
    for x in c:
        tot += np.log(6.0 - 2.0 * x - 2.0 * a).sum()
    return tot / c.size**3


def _np_grid_mean_ice(c):
    y = c[:, None]
    z = c[None, :]
    s1, s2, s3 = y + z, y * z, y * y * z * z
    tot = 0.0
    for x in c:
        p = (
            16464.0
            - 3136.0 * (x + s1)
            - 2016.0 * (x * s1 + s2)
            - 960.0 * x * s2
            + 16.0 * (x * x * (y * y + z * z) + s3)
            - 32.0 * (x * x * s2 + x * s2 * s1)
        )
        tot += np.log(p).sum()
    return tot / c.size**3


@kernel(_np_grid_mean_cubic)
def _grid_mean_cubic(c):
    h = c.size
    tot = 0.0
    for i in range(h):
        for j in range(h):
            for k in range(h):
                tot += math.log(6.0 - 2.0 * c[i] - 2.0 * c[j] - 2.0 * c[k])
    return tot / (h * h * h)


@kernel(_np_grid_mean_ice)
def _grid_mean_ice(c):
    h = c.size
    tot = 0.0
    for i in range(h):
        x = c[i]
        for j in range(h):
            y = c[j]
            for k in range(h):
                z = c[k]
                p = (
                    16464.0
                    - 3136.0 * (x + y + z)
                    - 2016.0 * (x * y + x * z + y * z)
                    - 960.0 * x * y * z
                    + 16.0 * (x * x * y * y + x * x * z * z + y * y * z * z)
                    - 32.0 * (x * x * y * z + x * y * y * z + x * y * z * z)
                )
                tot += math.log(p)
    return tot / (h * h * h)


def _midpoint_cos(N: int) -> np.ndarray:
    # the integrands depend on cos(2 pi u) only, and nodes u, 1-u share a cosine
    return np.cos(2 * np.pi * (np.arange(N // 2) + 0.5) / N)


def _refine(kernel, tol: float, start: int = 16, max_n: int = 2048) -> float:
    N = start
    prev = kernel(_midpoint_cos(N))
    prev_rich = None
    while N < max_n:
        N *= 2
        cur = kernel(_midpoint_cos(N))
        rich = (8.0 * cur - prev) / 7.0  # midpoint error ~ h^3 at the log singularity
        if prev_rich is not None and abs(rich - prev_rich) < tol:
            return float(rich)
        prev, prev_rich = cur, rich
    return float(prev_rich)


def cubic_lattice_tau_limit(tol: float = 1e-8) -> float:
    """``lim tau(C_m □ C_m □ C_m)`` = mean of ``log(6 - 2cx - 2cy - 2cz)``."""
    return _refine(_grid_mean_cubic, tol)


def ice_ic_tau(tol: float = 1e-9) -> float:
    """Spanning-tree entropy per vertex of cubic ice (diamond lattice)."""
    return _refine(_grid_mean_ice, tol) / 8.0


def triangular_tau_limit(tol: float = 1e-10) -> float:
    """``(5/pi) sum sin(i pi/3)/i^2`` summed in period-6 groups.

    Each group ``1/(6k+1)^2 + 1/(6k+2)^2 - 1/(6k+4)^2 - 1/(6k+5)^2`` is positive
    and below ``1/(6 k^3)``; the tail after ``K`` groups is therefore below
    ``(5/pi)(sqrt3/2) / (12 K^2)``.
    """
    pref = 5 / math.pi * math.sqrt(3) / 2
    K = int(math.ceil(math.sqrt(pref / (12 * tol)))) + 1
    k = np.arange(K, dtype=float)
    groups = 1 / (6 * k + 1) ** 2 + 1 / (6 * k + 2) ** 2 - 1 / (6 * k + 4) ** 2 - 1 / (6 * k + 5) ** 2
    return float(pref * np.sum(groups[::-1]))


# -- closed-form families -----------------------------------------------------


def clique_cycle_u(m: int, ell: int) -> int:
    """``x^(2 ell) + x^(-2 ell)`` with ``x = (sqrt m + sqrt(m+4))/2``, exactly."""
    a, b = 2, m + 2
    if ell == 0:
        return a
    for _ in range(ell - 1):
        a, b = b, (m + 2) * b - a
    return b


def clique_cycle_tree_count(m: int, ell: int) -> TreeCount:
    """``t(K_m □ C_ell) = (ell/m) (u_ell - 2)^(m-1)`` in exact arithmetic."""
    if m < 3 or ell < 3:
        raise GraphError("clique_cycle_tree_count needs m, ell >= 3")
    T = clique_cycle_u(m, ell) - 2
    num = ell * T ** (m - 1)
    t, r = divmod(num, m)
    if r:
        raise ArithmeticError("non-integral clique-cycle tree count")  # pragma: no cover
    logt = math.log(ell) - math.log(m) + (m - 1) * math.log(T)
    return TreeCount(logt, m * ell, t)


def hypercube_tree_count(d: int) -> int:
    if d < 1:
        raise GraphError("hypercube dimension must be >= 1")
    num = 1
    for i in range(1, d + 1):
        num *= (2 * i) ** comb(d, i)
    t, r = divmod(num, 1 << d)
    assert r == 0
    return t


def hypercube_tau(d: int) -> float:
    """``tau(Q_d)`` in floating point, usable far beyond the exact range."""
    if d < 1:
        raise GraphError("hypercube dimension must be >= 1")
    logt = sum(comb(d, i) * math.log(2 * i) for i in range(1, d + 1)) - d * math.log(2)
    return logt / 2**d


def tau_random_regular(d: int) -> float:
    """``log((d-1)^(d-1) / (d^2-2d)^(d/2-1))``, the random d-regular tree entropy."""
    if d < 3:
        raise GraphError("tau_random_regular needs d >= 3")
    return (d - 1) * math.log(d - 1) - (d / 2 - 1) * math.log(d * d - 2 * d)
