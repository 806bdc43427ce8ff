"""Monte-Carlo estimate of ``T(G)``, the mean of ``2^|P|`` over Eulerian partitions.

A uniform Eulerian partition is a uniform perfect matching of the edge ends at
every vertex.  Matchings are drawn by sequential pairing: the first unpaired end
is matched with a uniformly chosen remaining one, which costs ``d/2 - 1``
random draws at a vertex of degree ``d``.

Random draws come from a counter-based stream: draw ``r`` of trial ``t`` in
batch ``b`` is ``mix64(key_b + (t R + r + 1) * golden)`` where ``R`` is the
number of draws per trial.  Batches are therefore reproducible on their own,
results do not depend on how batches are spread over worker threads, and the
compiled and vectorised kernels produce identical trail histograms.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _accel
from ._accel import jit
from ._trails import (
    batch_key,
    count_trails,
    count_trails_batch,
    end_incidence,
    mix64,
    uniform_from_counter,
)
from .errors import GraphError
from .estimates import pauling
from .graph import Graph

__all__ = ["MCConfig", "MCEstimate", "sample_trail_count", "estimate", "rho_from_t", "LOG_MODE_EDGES"]

LOG_MODE_EDGES = 900


@dataclass(frozen=True)
class MCConfig:
    trials_per_batch: int = 10**6
    batches: int = 1000
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.trials_per_batch < 1:
            raise ValueError("trials_per_batch must be at least 1")
        if self.batches < 2:
            raise ValueError("batches must be at least 2")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


@dataclass(frozen=True)
class MCEstimate:
    """Batch-means estimate.

    When ``|E|`` exceeds :data:`LOG_MODE_EDGES` the batch means are stored
    divided by ``exp(log_scale)``; ``t_mean`` may then overflow to ``inf`` while
    ``log_t_mean`` and the entropy fields stay finite.
    """

    t_mean: float
    batch_means: np.ndarray
    ci_low: float
    ci_high: float
    rho: float
    rho_ci: tuple[float, float]
    trials_total: int
    ns_per_trial: float
    log_t_mean: float
    log_scale: float = 0.0
    trail_histogram: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    backend: str = "numpy"

    @property
    def ci_halfwidth(self) -> float:
        return 0.5 * (self.ci_high - self.ci_low)


def _check(g: Graph) -> None:
    if g.n == 0 or np.any(g.degrees == 0) or np.any(g.degrees % 2):
        raise GraphError("Eulerian partitions need positive even degrees")


def rho_from_t(g: Graph, t_value: float) -> float:
    if not t_value > 0:
        raise ValueError("T(G) must be positive")
    return pauling(g.degrees) + math.log(t_value) / g.n


def _rho_from_log(g: Graph, log_t: float) -> float:
    return pauling(g.degrees) + log_t / g.n


def sample_trail_count(g: Graph, rng_state) -> int:
    """``|P|`` for one uniform Eulerian partition (shuffle, then pair neighbours)."""
    _check(g)
    rng = rng_state if isinstance(rng_state, np.random.Generator) else np.random.default_rng(rng_state)
    offsets, ends = end_incidence(g)
    partner = np.empty(ends.size, dtype=np.int64)
    for v in range(g.n):
        local = rng.permutation(ends[offsets[v] : offsets[v + 1]])
        partner[local[0::2]] = local[1::2]
        partner[local[1::2]] = local[0::2]
    return int(count_trails(partner, np.zeros(g.num_edges, dtype=np.int64), 1))


# -- kernels -----------------------------------------------------------------


@jit
def _batch_loop(init_ends, offsets, draw_off, key, trials, hist):
    L = init_ends.size
    nv = offsets.size - 1
    R = np.uint64(draw_off[nv])
    ends = np.empty(L, dtype=np.int64)
    partner = np.empty(L, dtype=np.int64)
    stamp = np.zeros(L // 2, dtype=np.int64)
    golden = np.uint64(0x9E3779B97F4A7C15)
    one = np.uint64(1)
    for t in range(trials):
        ends[:] = init_ends
        base = np.uint64(t) * R
        for v in range(nv):
            lo = offsets[v]
            d = offsets[v + 1] - lo
            c = base + np.uint64(draw_off[v])
            for i in range(0, d - 2, 2):
                z = mix64(key + (c + one) * golden)
                u = np.float64(z >> np.uint64(11)) * 1.1102230246251565e-16
                c += one
                j = i + 1 + int(u * (d - i - 1))
                tmp = ends[lo + i + 1]
                ends[lo + i + 1] = ends[lo + j]
                ends[lo + j] = tmp
            for i in range(0, d, 2):
                a = ends[lo + i]
                b = ends[lo + i + 1]
                partner[a] = b
                partner[b] = a
        hist[count_trails(partner, stamp, t + 1)] += 1
    return hist


class _Layout:
    """Per-graph arrays shared by both kernels."""

    def __init__(self, g: Graph):
        self.offsets, self.ends = end_incidence(g)
        deg = np.diff(self.offsets)
        self.draw_off = np.zeros(g.n + 1, dtype=np.int64)
        np.cumsum(deg // 2 - 1, out=self.draw_off[1:])
        self.R = int(self.draw_off[-1])
        self.L = int(self.ends.size)
        self.groups = []
        for d in np.unique(deg).tolist():
            vs = np.flatnonzero(deg == d)
            block = self.ends[self.offsets[vs][:, None] + np.arange(d)]
            self.groups.append((d, block, self.draw_off[vs]))


def _batch_numpy(lay: _Layout, key, trials: int, hist: np.ndarray, chunk: int = 2048) -> np.ndarray:
    for lo in range(0, trials, chunk):
        t = np.arange(lo, min(lo + chunk, trials), dtype=np.uint64)
        C = t.size
        partner = np.empty((C, lay.L), dtype=np.int64)
        base = t * np.uint64(lay.R)
        for d, block, off in lay.groups:
            W = np.broadcast_to(block, (C,) + block.shape).copy()
            for s, i in enumerate(range(0, d - 2, 2)):
                u = uniform_from_counter(key, base[:, None] + (off + s).astype(np.uint64)[None, :])
                j = i + 1 + (u * (d - i - 1)).astype(np.int64)
                a = W[:, :, i + 1].copy()
                b = np.take_along_axis(W, j[..., None], axis=2)[..., 0]
                W[:, :, i + 1] = b
                np.put_along_axis(W, j[..., None], a[..., None], axis=2)
            x = W[:, :, 0::2].reshape(C, -1)
            y = W[:, :, 1::2].reshape(C, -1)
            np.put_along_axis(partner, x, y, axis=1)
            np.put_along_axis(partner, y, x, axis=1)
        hist += np.bincount(count_trails_batch(partner), minlength=hist.size)
    return hist


def _run_batch(lay: _Layout, key, trials: int, n_edges: int, use_numba: bool) -> np.ndarray:
    hist = np.zeros(n_edges + 1, dtype=np.int64)
    if use_numba:
        return _batch_loop(lay.ends, lay.offsets, lay.draw_off, key, trials, hist)
    return _batch_numpy(lay, key, trials, hist)


def _log_mean(hist: np.ndarray, trials: int) -> float:
    k = np.flatnonzero(hist)
    terms = k * math.log(2.0) + np.log(hist[k].astype(float))
    top = terms.max()
    return top + math.log(math.fsum(np.exp(terms - top))) - math.log(trials)


def _exact_mean(hist: np.ndarray, trials: int) -> float:
    return math.fsum(float(c) * 2.0**k for k, c in enumerate(hist.tolist()) if c) / trials


def estimate(g: Graph, cfg: MCConfig | None = None, backend: str | None = None) -> MCEstimate:
    """Batch-means estimate of ``T(G)`` and ``rho(G) = rho_hat + ln T / n``.

    The interval is the grand mean plus or minus two standard errors of the
    batch means.  ``backend`` is ``"numba"``, ``"numpy"`` or ``None`` for the
    process default.
    """
    _check(g)
    cfg = cfg or MCConfig()
    backend = backend or _accel.backend()
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    use_numba = backend == "numba" and _accel.HAVE_NUMBA
    lay = _Layout(g)
    m = g.num_edges
    if use_numba:  # compile outside the timed region
        _run_batch(lay, batch_key(cfg.seed, 0), 1, m, True)

    keys = [batch_key(cfg.seed, b) for b in range(cfg.batches)]
    start = time.perf_counter()
    if cfg.workers == 1:
        hists = [_run_batch(lay, k, cfg.trials_per_batch, m, use_numba) for k in keys]
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            hists = list(pool.map(lambda k: _run_batch(lay, k, cfg.trials_per_batch, m, use_numba), keys))
    elapsed = time.perf_counter() - start
    trials_total = cfg.trials_per_batch * cfg.batches

    if m <= LOG_MODE_EDGES:
        log_scale = 0.0
        means = np.array([_exact_mean(h, cfg.trials_per_batch) for h in hists])
    else:
        logs = np.array([_log_mean(h, cfg.trials_per_batch) for h in hists])
        log_scale = float(logs.max())
        means = np.exp(logs - log_scale)

    grand = math.fsum(means) / means.size
    half = 2.0 * float(np.std(means, ddof=1)) / math.sqrt(means.size)
    lo_s, hi_s = max(grand - half, 0.0), grand + half
    lo_s, hi_s = min(lo_s, grand), max(hi_s, grand)  # guard rounding
    log_t = math.log(grand) + log_scale
    scale = math.exp(log_scale) if log_scale < 700 else math.inf
    rho_lo = _rho_from_log(g, math.log(lo_s) + log_scale) if lo_s > 0 else -math.inf
    rho_hi = _rho_from_log(g, math.log(hi_s) + log_scale)
    return MCEstimate(
        t_mean=grand * scale,
        batch_means=means,
        ci_low=lo_s * scale,
        ci_high=hi_s * scale,
        rho=_rho_from_log(g, log_t),
        rho_ci=(rho_lo, rho_hi),
        trials_total=trials_total,
        ns_per_trial=elapsed * 1e9 / trials_total,
        log_t_mean=log_t,
        log_scale=log_scale,
        trail_histogram=np.sum(hists, axis=0),
        backend="numba" if use_numba else "numpy",
    )
