"""Acceptance checks, one test per criterion.

Every test records a ``criterion N: PASS|FAIL ...`` line.  The lines are
printed as the tests run (visible with ``-s``) and again as a block at the end
of the session.  Set ``ICEENTROPY_FULL_ACCEPTANCE=1`` to run the correlation
experiment at full scale (10^7 trials per corruption level).
"""

import math
import os
import time
from contextlib import contextmanager
from functools import lru_cache

import numpy as np
import pytest

from iceentropy import _accel
from iceentropy.cli import run_experiment_corrupt
from iceentropy.eo_exact import eo_count, partition_sum_exact, rt
from iceentropy.eo_mc import MCConfig, estimate
from iceentropy.estimates import (
    clique_cycle_rho,
    clique_cycle_rho_asymptotic,
    pauling,
    report,
    rho_tau,
)
from iceentropy.generators import (
    LatticeSpec,
    clique,
    clique_cycle,
    cycle,
    hypercube,
    make,
    random_regular,
    symmetry_generators,
    torus,
    triangular_torus,
)
from iceentropy.graph import Graph, disjoint_union, subdivide_edge
from iceentropy.spanning import (
    clique_cycle_tree_count,
    cubic_lattice_tau_limit,
    hypercube_tau,
    hypercube_tree_count,
    ice_ic_tau,
    laplacian_spectrum,
    product_spectrum,
    square_lattice_tau_limit,
    tau_limit_product_cycle,
    tree_count_exact,
    tree_count_from_spectrum,
    triangular_tau_limit,
    tube_tau_limit,
)
from iceentropy.transfer import build, orbit_partition, rho_product_cycle_limit
from oracles import edges_of, eo_brute, regular_tournaments_brute
from test_estimates import lattice_members, load_small_eulerian

FULL = os.environ.get("ICEENTROPY_FULL_ACCEPTANCE", "0") == "1"
RESULTS: dict[int, str] = {}

TUBE_RHO = [0.46210, 0.46299, 0.44216, 0.44577, 0.43690, 0.43960, 0.43477, 0.43672, 0.43369, 0.43514]
TUBE_TAU = [1.04453, 1.09917, 1.12373, 1.13687, 1.14472, 1.14979, 1.15326, 1.15574, 1.15757, 1.15895]
HYPERCUBE = {
    4: (0.405465, 0.464780),
    6: (0.916291, 0.948381),
    8: (1.475907, 1.489316),
    10: (2.063693, 2.069225),
    12: (2.669829, 2.672343),
    14: (3.288868, 3.290206),
}


class Outcome:
    def __init__(self):
        self.notes = []
        self.soft_failures = []

    def note(self, text):
        self.notes.append(text)

    def fail_soft(self, text):
        """Record a failed sub-check without aborting the remaining checks."""
        self.soft_failures.append(text)


def _record(n, line):
    RESULTS[n] = line
    print(line)


@contextmanager
def criterion(n, title):
    out = Outcome()
    start = time.perf_counter()
    try:
        yield out
    except BaseException as exc:
        if isinstance(exc, pytest.skip.Exception):
            _record(n, f"criterion {n}: SKIP {title} ({exc})")
        else:
            _record(n, f"criterion {n}: FAIL {title} ({type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''})")
        raise
    elapsed = time.perf_counter() - start
    status = "FAIL" if out.soft_failures else "PASS"
    details = "; ".join(out.soft_failures + out.notes + [f"{elapsed:.1f} s"])
    _record(n, f"criterion {n}: {status} {title} ({details})")


@pytest.fixture(scope="module", autouse=True)
def summary(request):
    yield
    reporter = request.config.pluginmanager.getplugin("terminalreporter")
    lines = [RESULTS[k] for k in sorted(RESULTS)]
    if reporter is not None:
        reporter.write_sep("=", "acceptance summary")
        for line in lines:
            reporter.write_line(line)
    else:  # pragma: no cover
        print("\n".join(lines))


def _small_corpus():
    graphs = [cycle(n) for n in range(3, 8)]
    graphs += [clique(5), clique(7), torus([3, 3]), torus([3, 4]), triangular_torus(3, 3), hypercube(4)]
    graphs += [clique_cycle(3, 3), clique_cycle(5, 3), random_regular(10, 4, seed=1), random_regular(9, 4, seed=2)]
    graphs += [Graph(2, [(0, 1, 4)]), Graph(3, [(0, 1, 2), (1, 2, 2), (0, 2, 2)]), cycle(9)]
    graphs += [Graph(5, [(0, 1), (1, 2), (2, 0), (0, 3), (3, 4), (4, 0)]), disjoint_union(cycle(3), cycle(4))]
    return graphs


def test_criterion_01_exact_small_counts():
    with criterion(1, "exact small counts") as c:
        start = time.perf_counter()
        assert [regular_tournaments_brute(m) for m in (3, 5, 7)] == [2, 24, 2640]
        assert [rt(m) for m in (3, 5, 7)] == [2, 24, 2640]
        assert all(eo_count(cycle(n)) == 2 for n in range(3, 11))
        corpus = _small_corpus()
        assert len(corpus) == 20
        for i, a in enumerate(corpus):
            b = corpus[(i + 7) % len(corpus)]
            assert eo_count(disjoint_union(a, b)) == eo_count(a) * eo_count(b)
            (u, v), _ = a.edge_items[0]
            assert eo_count(subdivide_edge(a, (u, v))) == eo_count(a)
        assert eo_count(torus([3, 3])) == eo_brute(9, edges_of(torus([3, 3])))
        assert rt(9) == 3230080
        value = math.log(rt(9) / 70) / 7
        assert abs(value - 1.53422) < 5e-6
        assert time.perf_counter() - start < 30
        c.note(f"(1/7)ln(RT(9)/70) = {value:.6f}")


def test_criterion_02_partition_identity():
    with criterion(2, "partition identity, exact integers") as c:
        graphs = [cycle(3), cycle(4), cycle(5), cycle(6), clique(5), torus([3, 3])]
        for g in graphs:
            weight = math.prod(math.factorial(int(d) // 2) for d in g.degrees)
            assert eo_count(g) * weight == partition_sum_exact(g)
        c.note(f"{len(graphs)} graphs")


def test_criterion_03_tube_transfer_limits():
    with criterion(3, "tubes m=3..12 via transfer matrix") as c:
        start = time.perf_counter()
        rhos, taus = [], []
        for m in range(3, 13):
            spec = LatticeSpec("cycle", (m,))
            rhos.append(round(build(make(spec), symmetry_generators(spec)).rho_limit, 5))
            taus.append(round(tube_tau_limit(m), 5))
        assert rhos == TUBE_RHO
        assert taus == TUBE_TAU
        elapsed = time.perf_counter() - start
        assert elapsed < 300
        c.note(f"rho(C12) = {rhos[-1]:.5f}")


def test_criterion_04_three_cycle_products():
    with criterion(4, "C3xC3xCinf and C3xC4xCinf") as c:
        rows = []
        for l in (3, 4):
            spec = LatticeSpec("torus", (3, l))
            fiber = make(spec)
            rho = rho_product_cycle_limit(fiber, symmetry_generators(spec))
            rows.append((round(rho, 5), round(tau_limit_product_cycle(fiber), 5)))
        assert [r[0] for r in rows] == [0.95055, 0.94486]
        assert rows[0][1] == 1.61344
        # the stated rho_tau for this row, 0.94521, follows from tau = 1.63324
        assert round(rho_tau(6, tau_limit_product_cycle(make(LatticeSpec("torus", (3, 4))))), 5) == 0.94521
        if rows[1][1] != 1.63332:
            c.fail_soft(f"tau(C3xC4xCinf) is {rows[1][1]:.5f}, stated 1.63332")
        _, reps, _ = orbit_partition(20, symmetry_generators(LatticeSpec("torus", (4, 5))))
        assert reps.size == 7456
        c.note("both rho values and tau(C3xC3xCinf) match; C4xC5 fiber has 7456 orbits")


@pytest.mark.xfail(strict=True, reason="the eigenvalue sum gives 1.63324; 1.63332 contradicts the tabulated rho_tau")
def test_criterion_04_tau_c3c4_as_stated():
    assert round(tau_limit_product_cycle(torus([3, 4])), 5) == 1.63332


def test_criterion_05_spanning_tree_engines():
    with criterion(5, "spanning-tree engines agree") as c:
        g = torus([3, 3])
        det = tree_count_exact(g)
        spec = product_spectrum(laplacian_spectrum(cycle(3)), laplacian_spectrum(cycle(3)))
        spectral = math.exp(tree_count_from_spectrum(spec))
        closed = clique_cycle_tree_count(3, 3).exact
        assert det == closed == 11664
        assert spectral == pytest.approx(11664, rel=1e-6)
        assert all(hypercube_tree_count(d) == tree_count_exact(hypercube(d)) for d in range(1, 7))
        c.note("t(C3xC3) = 11664 three ways; Q1..Q6 match")


def test_criterion_06_constants():
    with criterion(6, "closed-form constants and heuristic values") as c:
        timings = {}
        for name, fn in [
            ("square", square_lattice_tau_limit),
            ("triangular", triangular_tau_limit),
            ("cubic", cubic_lattice_tau_limit),
            ("ice", ice_ic_tau),
        ]:
            t0 = time.perf_counter()
            fn()
            timings[name] = time.perf_counter() - t0
        assert max(timings.values()) < 10
        assert abs(square_lattice_tau_limit() - 1.1662436) <= 1e-6
        assert abs(cubic_lattice_tau_limit() - 1.67338) <= 1e-5
        assert abs(ice_ic_tau() - 1.20645995) <= 1e-6
        assert abs(rho_tau(4, square_lattice_tau_limit()) - 0.43054) <= 1e-4
        assert abs(rho_tau(6, triangular_tau_limit()) - 0.95417) <= 1e-4
        assert abs(rho_tau(6, cubic_lattice_tau_limit()) - 0.9251) <= 1e-4
        tri = triangular_tau_limit()
        if abs(tri - 1.61530) > 1e-5:
            c.fail_soft(f"triangular constant is {tri:.7f}, the stated 1.61530 is off by {abs(tri - 1.61530):.1e}")
        c.note("other six values within tolerance")


@pytest.mark.xfail(strict=True, reason="the series evaluates to 1.6153297; the stated value 1.61530 is misrounded")
def test_criterion_06_triangular_constant_as_stated():
    assert abs(triangular_tau_limit() - 1.61530) <= 1e-5


def test_criterion_07_hypercube_columns():
    with criterion(7, "hypercube rho_hat and rho_tau, EO(Q4)") as c:
        for d, (rh, rt_) in HYPERCUBE.items():
            assert round(pauling([d]), 6) == rh
            assert round(rho_tau(d, hypercube_tau(d)), 6) == rt_
        rho_q4 = math.log(eo_count(hypercube(4))) / 16
        assert abs(rho_q4 - 0.499770) < 5e-6
        c.note(f"EO(Q4) = {eo_count(hypercube(4))}")


def test_criterion_08_clique_cycles():
    with criterion(8, "clique-cycle limits") as c:
        assert [round(clique_cycle_rho(m), 5) for m in (3, 5, 7)] == [0.46210, 0.97656, 1.53422]
        for m in (3, 5):
            spec = LatticeSpec("clique", (m,))
            assert abs(rho_product_cycle_limit(make(spec), symmetry_generators(spec)) - clique_cycle_rho(m)) < 1e-9
        asym = clique_cycle_rho_asymptotic(35)
        assert abs(asym - 10.48270) < 0.002
        c.note(f"asymptotic at m=35: {asym:.5f}")


@lru_cache(maxsize=None)
def _coverage(name, seed):
    g, exact = {"K5": (clique(5), 768 / 243), "C3xC3": (torus([3, 3]), 75776 / 19683)}[name]
    est = estimate(g, MCConfig(10**4, 1000, seed=seed))
    return est.ci_low <= exact <= est.ci_high, (est.t_mean - exact) / (est.ci_halfwidth / 2)


def test_criterion_09_monte_carlo_gates():
    if not _accel.HAVE_NUMBA:
        pytest.skip("needs the compiled sampler for 10^7 trials per run")
    with criterion(9, "Monte-Carlo statistical gates") as c:
        for name in ("K5", "C3xC3"):
            hits = sum(_coverage(name, seed)[0] for seed in range(5))
            c.note(f"{name} covered {hits}/5")
            if hits < 4:
                zs = ", ".join(f"{_coverage(name, s)[1]:+.2f}" for s in range(5))
                c.fail_soft(f"{name} 2-sigma interval covered T in {hits}/5 seeds (z = {zs})")
        # calibration over more seeds: standardised errors should look like N(0, 1)
        z = np.array([_coverage("C3xC3", seed)[1] for seed in range(20)])
        covered = int(np.sum(np.abs(z) <= 2))
        c.note(f"C3xC3 over 20 seeds: {covered}/20 covered, sd(z) = {z.std(ddof=1):.2f}")
        assert covered >= 16 and 0.6 < z.std(ddof=1) < 1.6 and abs(z.mean()) < 0.8
        g = torus([4, 4])
        one = estimate(g, MCConfig(2000, 8, seed=3, workers=1))
        four = estimate(g, MCConfig(2000, 8, seed=3, workers=4))
        assert np.array_equal(one.batch_means, four.batch_means)
        sq = estimate(torus([16, 16]), MCConfig(10**4, 100, seed=1))
        assert 0.42 <= sq.rho <= 0.45
        c.note(f"rho(C16xC16) = {sq.rho:.5f}")


@pytest.mark.xfail(strict=True, reason="seeds 0-4 give z = +2.24 and -2.49 on C3xC3; see the 20-seed calibration")
def test_criterion_09_four_of_five_seeds_c3xc3():
    if not _accel.HAVE_NUMBA:
        pytest.skip("needs the compiled sampler")
    assert sum(_coverage("C3xC3", seed)[0] for seed in range(5)) >= 4


def test_criterion_10_bounds_suite():
    with criterion(10, "bounds suite") as c:
        graphs = load_small_eulerian() + lattice_members()
        assert len(graphs) >= 200
        violations, conj = 0, 0
        for g in graphs:
            r = report(g)
            rho = r.rho_exact
            ok = r.rho_hat <= rho + 1e-12 and rho <= r.schrijver_upper + 1e-12 and rho <= r.new_bound_upper + 1e-12
            ok &= rho - r.rho_hat <= 27 / 10
            if r.las_vergnas_upper is not None:
                ok &= rho <= r.las_vergnas_upper + 1e-12
            if r.degree_stats.d_min == r.degree_stats.d_max:
                ok &= rho - r.rho_hat <= 21 / 22
            violations += not ok
            conj += r.conjecture_upper is not None and rho > r.conjecture_upper + 1e-12
        assert violations == 0
        c.note(f"{len(graphs)} graphs, 0 bound violations, {conj} conjecture violations")
        assert conj == 0


def test_criterion_11_correlation_experiment():
    if not _accel.HAVE_NUMBA:
        pytest.skip("needs the compiled sampler")
    with criterion(11, "rho_mc vs rho_tau under switchings") as c:
        if FULL:
            mc = MCConfig(10**4, 1000, workers=os.cpu_count() or 1)
        else:
            mc = MCConfig(2000, 100)
        start = time.perf_counter()
        rows = run_experiment_corrupt(LatticeSpec("torus", (40, 40)), 10000, 25, mc, seed=0)
        elapsed = time.perf_counter() - start
        x = np.array([r.rho_mc for r in rows])
        y = np.array([r.rho_tau for r in rows])
        corr = float(np.corrcoef(x, y)[0, 1])
        scale = "full scale" if FULL else "reduced scale, 2e5 trials per level"
        c.note(f"Pearson r = {corr:.5f}, {scale}, {elapsed / 60:.1f} min")
        assert len(rows) == 25 and rows[-1].switches_requested == 10000
        assert corr >= 0.99


def test_criterion_12_throughput():
    with criterion(12, "sampler throughput on C16xC16") as c:
        g = torus([16, 16])
        est = estimate(g, MCConfig(20000, 5, seed=1))
        target = 10 * 20 * g.num_edges
        c.note(f"{est.ns_per_trial:.0f} ns/trial, gate {target} ns, backend {est.backend}")
        assert est.ns_per_trial <= target
