"""Closed-form estimates and upper bounds for the residual entropy.

All entropies are per vertex and in natural log units.  Bounds that do not
apply to a graph are reported as absent (``None``) by :func:`report` rather
than as NaN.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

from .errors import GraphError, ResourceLimitError
from .graph import DegreeStats, Graph, degree_stats, girth, is_connected

log = logging.getLogger(__name__)

__all__ = [
    "log_central_binomial",
    "pauling",
    "schrijver_upper",
    "las_vergnas_upper",
    "new_bound_upper",
    "conjecture_upper",
    "rt_asymptotic",
    "log_rt",
    "rho_tau",
    "clique_cycle_rho",
    "clique_cycle_rho_asymptotic",
    "extrapolate_limit",
    "ReportOptions",
    "EntropyReport",
    "report",
]

_LN2 = math.log(2.0)


@lru_cache(maxsize=None)
def log_central_binomial(d: int) -> float:
    """``ln C(d, d/2)``; exact integer route up to ``d = 60``, log-gamma beyond."""
    if d <= 60:
        return math.log(comb(d, d // 2))
    return math.lgamma(d + 1) - 2 * math.lgamma(d // 2 + 1)


def _degrees(obj) -> np.ndarray:
    d = np.asarray(obj.degrees if isinstance(obj, Graph) else obj, dtype=np.int64).ravel()
    if d.size == 0:
        raise GraphError("empty degree sequence")
    if np.any(d <= 0) or np.any(d % 2):
        raise GraphError("degrees must be positive and even")
    return d


def pauling(degrees) -> float:
    """Pauling estimate ``(1/n) sum (ln C(d, d/2) - (d/2) ln 2)``."""
    d = _degrees(degrees)
    return sum(log_central_binomial(int(x)) - x / 2 * _LN2 for x in d.tolist()) / d.size


def schrijver_upper(degrees) -> float:
    d = _degrees(degrees)
    return sum(log_central_binomial(int(x)) for x in d.tolist()) / (2 * d.size)


def las_vergnas_upper(g: Graph) -> float:
    """Per-vertex log of ``K^(2/(d-2)) (2^(d/2g) K^(1-d/(g(d-2))))^n``."""
    d = _degrees(g)
    if np.any(d != d[0]):
        raise GraphError("Las Vergnas bound needs a regular graph")
    deg = int(d[0])
    if deg < 4:
        raise GraphError("Las Vergnas bound needs degree >= 4")
    if not is_connected(g):
        raise GraphError("Las Vergnas bound needs a connected graph")
    gi = girth(g)
    lnK = log_central_binomial(deg) - deg / 2 * _LN2
    per_vertex = deg / (2 * gi) * _LN2 + (1 - deg / (gi * (deg - 2))) * lnK
    return (2 / (deg - 2) * lnK + g.n * per_vertex) / g.n


def new_bound_upper(g: Graph, tree=None) -> float:
    """Per-vertex log of ``2^(|E| + 3(n-1)/2) / (pi^((n-1)/2) sqrt(t(G)))``.

    ``tree`` is a :class:`~iceentropy.spanning.TreeCount` (computed when omitted).
    """
    _degrees(g)
    if not is_connected(g):
        raise GraphError("spanning-tree bound needs a connected graph")
    if tree is None:
        from .spanning import tree_entropy

        tree = tree_entropy(g)
    n = g.n
    logb = (g.num_edges + 1.5 * (n - 1)) * _LN2 - (n - 1) / 2 * math.log(math.pi) - 0.5 * tree.log_value
    return logb / n


def rt_asymptotic(m: int) -> float:
    """``ln RT(m)`` from ``d^(1/2) (2^(d+2)/(pi(d+1)))^(d/2) e^(-1/2)`` with ``d = m - 1``."""
    if m < 3 or m % 2 == 0:
        raise GraphError("rt_asymptotic needs odd m >= 3")
    d = m - 1
    return 0.5 * math.log(d) + d / 2 * ((d + 2) * _LN2 - math.log(math.pi * (d + 1))) - 0.5


def log_rt(m: int) -> tuple[float, bool]:
    """``(ln RT(m), exact)``, falling back to the asymptotic formula."""
    from .eo_exact import RT_LIMIT, rt

    if m <= RT_LIMIT:
        return math.log(rt(m)), True
    return rt_asymptotic(m), False


def conjecture_upper(degrees, return_exactness: bool = False):
    """``(1/n) sum ln RT(d+1) / (d+1)``; the hypothetical product bound."""
    d = _degrees(degrees)
    total = 0.0
    exact = True
    for x, cnt in zip(*np.unique(d, return_counts=True)):
        lr, ex = log_rt(int(x) + 1)
        exact &= ex
        total += int(cnt) * lr / (int(x) + 1)
    val = total / d.size
    return (val, exact) if return_exactness else val


def rho_tau(d: int, tau_value: float) -> float:
    """``pauling(d-regular) + tau_d / 2 - tau / 2``."""
    from .spanning import tau_random_regular

    if d < 3:
        raise GraphError("rho_tau needs d >= 3")
    if d % 2:
        raise GraphError("rho_tau needs even d")
    rho_hat = log_central_binomial(d) - d / 2 * _LN2
    return rho_hat + 0.5 * tau_random_regular(d) - 0.5 * tau_value


def clique_cycle_rho(m: int) -> float:
    """``lim rho(K_m □ C_l) = (1/m) ln(RT(m+2) / C(m+1, (m+1)/2))`` for odd m."""
    from .eo_exact import RT_LIMIT, rt

    if m < 3 or m % 2 == 0:
        raise GraphError("clique_cycle_rho needs odd m >= 3")
    if m + 2 > RT_LIMIT:
        raise ResourceLimitError(f"exact RT({m + 2}) is beyond the supported range")
    return (math.log(rt(m + 2)) - log_central_binomial(m + 1)) / m


def clique_cycle_rho_asymptotic(m: int) -> float:
    if m < 3 or m % 2 == 0:
        raise GraphError("clique_cycle_rho_asymptotic needs odd m")
    return (m + 2) / 2 * _LN2 - (m - 1) / (2 * m) * math.log(m) - math.log(math.pi) / 2 - 3 / (2 * m)


def _rational_extrapolate(h, y) -> float:
    """Rational (Bulirsch-Stoer) extrapolation of ``y(h)`` to ``h = 0``."""
    n = len(y)
    prev2 = [0.0] * n
    prev = list(map(float, y))
    for k in range(1, n):
        cur = list(prev)
        for i in range(k, n):
            diff = prev[i] - prev[i - 1]
            if diff == 0.0:
                continue
            inner = prev[i] - prev2[i - 1]
            frac = diff / inner if inner != 0.0 else 0.0
            den = (h[i - k] / h[i]) * (1.0 - frac) - 1.0
            if den != 0.0:
                cur[i] = prev[i] + diff / den
        prev2, prev = prev, cur
    return prev[-1]


def extrapolate_limit(values) -> tuple[float, float]:
    """Limit of ``value(size)`` as ``size -> inf`` by rational extrapolation in ``1/size``.

    Returns ``(estimate, spread)`` where ``spread`` is the change in the estimate
    when the largest size is left out.
    """
    pts = sorted((float(s), float(v)) for s, v in values)
    if len(pts) < 3:
        raise ValueError("extrapolation needs at least 3 points")
    sizes = [s for s, _ in pts]
    if any(b <= a for a, b in zip(sizes, sizes[1:])) or sizes[0] <= 0:
        raise ValueError("sizes must be positive and distinct")
    h = [1.0 / s for s in sizes]
    y = [v for _, v in pts]
    est = _rational_extrapolate(h, y)
    spread = abs(est - _rational_extrapolate(h[:-1], y[:-1]))
    return est, spread


# -- report -----------------------------------------------------------------------


@dataclass(frozen=True)
class ReportOptions:
    """``exact``: ``True`` forces exact EO, ``False`` skips it, ``None`` tries it."""

    exact: bool | None = None
    mc: object | None = None  # MCConfig
    with_tau: bool = True


@dataclass(frozen=True)
class EntropyReport:
    n: int
    num_edges: int
    degree_stats: DegreeStats
    rho_hat: float
    schrijver_upper: float
    tau: float | None = None
    rho_tau: float | None = None
    las_vergnas_upper: float | None = None
    new_bound_upper: float | None = None
    conjecture_upper: float | None = None
    conjecture_asymptotic: bool = False
    rho_exact: float | None = None
    eo_exact: int | None = None
    rho_mc: float | None = None
    rho_mc_ci: tuple[float, float] | None = None
    notes: list = field(default_factory=list)

    @property
    def rho(self) -> float | None:
        return self.rho_exact if self.rho_exact is not None else self.rho_mc

    def upper_bounds(self) -> dict[str, float]:
        names = ("schrijver_upper", "las_vergnas_upper", "new_bound_upper")
        return {k: getattr(self, k) for k in names if getattr(self, k) is not None}

    def as_row(self) -> dict:
        ci = self.rho_mc_ci or (None, None)
        return {
            "n": self.n,
            "edges": self.num_edges,
            "rho_hat": self.rho_hat,
            "rho_exact": self.rho_exact,
            "rho_mc": self.rho_mc,
            "rho_lo": ci[0],
            "rho_hi": ci[1],
            "tau": self.tau,
            "rho_tau": self.rho_tau,
            "schrijver_upper": self.schrijver_upper,
            "las_vergnas_upper": self.las_vergnas_upper,
            "new_bound_upper": self.new_bound_upper,
            "conjecture_upper": self.conjecture_upper,
        }


def report(g: Graph, options: ReportOptions | None = None) -> EntropyReport:
    """Every applicable estimate and bound for ``g``, plus exact or sampled ``rho``."""
    from .eo_exact import eo_count
    from .spanning import tree_entropy

    opts = options or ReportOptions()
    deg = _degrees(g)
    stats = degree_stats(g)
    connected = is_connected(g)
    regular = bool(np.all(deg == deg[0]))
    fields: dict = {"notes": []}

    tree = None
    if opts.with_tau and connected:
        tree = tree_entropy(g)
        fields["tau"] = tree.tau
        fields["new_bound_upper"] = new_bound_upper(g, tree)
        if regular and deg[0] >= 4:
            fields["rho_tau"] = rho_tau(int(deg[0]), tree.tau)
    if connected and regular and deg[0] >= 4:
        fields["las_vergnas_upper"] = las_vergnas_upper(g)
    if g.is_simple:
        val, exact = conjecture_upper(deg, return_exactness=True)
        fields["conjecture_upper"] = val
        fields["conjecture_asymptotic"] = not exact

    if opts.exact is not False:
        try:
            eo = eo_count(g)
            fields["eo_exact"] = eo
            fields["rho_exact"] = math.log(eo) / g.n
        except ResourceLimitError as exc:
            if opts.exact:
                raise
            fields["notes"].append(f"exact count skipped: {exc}")
    if opts.mc is not None and "rho_exact" not in fields:
        from .eo_mc import estimate

        est = estimate(g, opts.mc)
        fields["rho_mc"] = est.rho
        fields["rho_mc_ci"] = est.rho_ci

    rep = EntropyReport(
        n=g.n,
        num_edges=g.num_edges,
        degree_stats=stats,
        rho_hat=pauling(deg),
        schrijver_upper=schrijver_upper(deg),
        **fields,
    )
    if rep.rho_exact is not None and rep.conjecture_upper is not None:
        if rep.rho_exact > rep.conjecture_upper + 1e-12:
            log.warning("conjectured product bound violated: rho=%r > %r", rep.rho_exact, rep.conjecture_upper)
            rep.notes.append("conjectured product bound violated")
    return rep
