import math
import time

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iceentropy import _accel
from iceentropy import spanning as sp_
from iceentropy.errors import GraphError, ResourceLimitError
from iceentropy.generators import clique, clique_cycle, cycle, hypercube, ice_ic, torus
from iceentropy.graph import Graph, disjoint_union
from iceentropy.spanning import (
    Spectrum,
    bareiss_determinant,
    catalan,
    clique_cycle_tree_count,
    cubic_lattice_tau_limit,
    hypercube_tau,
    hypercube_tree_count,
    ice_ic_tau,
    laplacian_spectrum,
    product_spectrum,
    square_lattice_tau_limit,
    tau_limit_product_cycle,
    tau_random_regular,
    tree_count_exact,
    tree_count_from_spectrum,
    tree_entropy,
    triangular_tau_limit,
    tube_tau_limit,
)
from oracles import edges_of, spanning_trees_exact

NAMED = {
    "C3": lambda: cycle(3),
    "C7": lambda: cycle(7),
    "K5": lambda: clique(5),
    "K7": lambda: clique(7),
    "C3xC3": lambda: torus([3, 3]),
    "C3xC4": lambda: torus([3, 4]),
    "C4xC4": lambda: torus([4, 4]),
    "Q3": lambda: hypercube(3),
    "Q4": lambda: hypercube(4),
    "Q5": lambda: hypercube(5),
}


@pytest.mark.parametrize("name", sorted(NAMED))
def test_tree_counts_against_frozen_oracle(name, frozen):
    g = NAMED[name]()
    expected = frozen["trees"][name]
    assert tree_count_exact(g) == expected
    assert tree_entropy(g).log_value == pytest.approx(math.log(expected), rel=1e-12)


@st.composite
def connected_multigraphs(draw):
    n = draw(st.integers(2, 9))
    perm = draw(st.permutations(range(n)))
    edges = [(perm[i], perm[draw(st.integers(0, i - 1))]) for i in range(1, n)]  # random tree
    extra = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=12))
    edges += [e for e in extra if e[0] != e[1]]
    return Graph(n, edges)


@given(connected_multigraphs())
@settings(max_examples=60, deadline=None)
def test_bareiss_matches_rational_elimination(g):
    assert tree_count_exact(g) == spanning_trees_exact(g.n, edges_of(g))


@given(connected_multigraphs())
@settings(max_examples=40, deadline=None)
def test_three_routes_agree(g):
    t = tree_count_exact(g)
    assert tree_entropy(g, exact=False).log_value == pytest.approx(math.log(t), rel=1e-9, abs=1e-9)
    spec = tree_count_from_spectrum(laplacian_spectrum(g))
    assert spec == pytest.approx(math.log(t), rel=1e-8, abs=1e-8)


def test_bareiss_small_cases():
    assert bareiss_determinant([]) == 1
    assert bareiss_determinant([[2, 1], [1, 2]]) == 3
    assert bareiss_determinant([[0, 1], [1, 0]]) == -1
    assert bareiss_determinant([[1, 2], [2, 4]]) == 0


def test_disconnected_graph():
    g = disjoint_union(cycle(3), cycle(3))
    assert tree_count_exact(g) == 0
    with pytest.raises(GraphError):
        tree_entropy(g)
    with pytest.raises(GraphError):
        tree_count_from_spectrum(laplacian_spectrum(g))


def test_exact_limit():
    with pytest.raises(ResourceLimitError):
        tree_count_exact(cycle(50), limit=10)


def test_product_spectrum_is_product_graph_spectrum():
    a, b = laplacian_spectrum(cycle(3)), laplacian_spectrum(cycle(5))
    direct = laplacian_spectrum(torus([3, 5]))
    np.testing.assert_allclose(product_spectrum(a, b).eigenvalues, direct.eigenvalues, atol=1e-9)
    assert Spectrum(np.array([1e-12, 2.0])).zero_count == 1


def test_clique_cycle_closed_form():
    for m, ell in [(3, 3), (3, 5), (5, 3), (5, 4), (7, 3)]:
        assert clique_cycle_tree_count(m, ell).exact == tree_count_exact(clique_cycle(m, ell))


@pytest.mark.parametrize("d", range(1, 7))
def test_hypercube_formula(d):
    assert hypercube_tree_count(d) == tree_count_exact(hypercube(d))
    assert hypercube_tau(d) == pytest.approx(math.log(hypercube_tree_count(d)) / 2**d, rel=1e-12)


def test_tube_limit_approached_by_long_tubes():
    for m in (3, 4, 6):
        fiber = laplacian_spectrum(cycle(m))
        seq = []
        for ell in (100, 1000, 10000):
            ring = Spectrum(2 - 2 * np.cos(2 * np.pi * np.arange(ell) / ell))
            spec = product_spectrum(fiber, ring)
            seq.append(tree_count_from_spectrum(spec) / (m * ell))
        limit = tube_tau_limit(m)
        gaps = [abs(x - limit) for x in seq]
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] < 2 * math.log(10000) / (m * 10000)


def test_product_cycle_limit_generalises_tube_limit():
    for m in (3, 5, 8):
        assert tau_limit_product_cycle(cycle(m)) == pytest.approx(tube_tau_limit(m), rel=1e-12)


def test_constants():
    assert catalan() == pytest.approx(float(mpmath.catalan), rel=1e-15)
    assert square_lattice_tau_limit() == pytest.approx(4 * catalan() / math.pi, rel=1e-15)
    assert square_lattice_tau_limit() == pytest.approx(1.1662436, abs=1e-6)
    assert triangular_tau_limit() == pytest.approx(float(5 / mpmath.pi * mpmath.clsin(2, mpmath.pi / 3)), abs=1e-10)
    assert cubic_lattice_tau_limit() == pytest.approx(1.67338, abs=1e-5)
    assert ice_ic_tau() == pytest.approx(1.20645995, abs=1e-6)


def test_lattice_constants_match_large_tori():
    assert tree_entropy(torus([30, 30]), exact=False).tau == pytest.approx(square_lattice_tau_limit(), abs=2e-3)
    assert tree_entropy(torus([10, 10, 10]), exact=False).tau == pytest.approx(cubic_lattice_tau_limit(), abs=5e-3)
    assert tree_entropy(ice_ic(6), exact=False).tau == pytest.approx(ice_ic_tau(), abs=3e-3)


def test_random_regular_tree_entropy():
    assert tau_random_regular(4) == pytest.approx(math.log(27 / 8))
    assert tau_random_regular(6) == pytest.approx(math.log(3125 / 576))
    with pytest.raises(GraphError):
        tau_random_regular(2)


def test_integral_kernels_agree_across_backends():
    c = sp_._midpoint_cos(24)
    for name in ("_grid_mean_cubic", "_grid_mean_ice"):
        fn = getattr(sp_, name)
        assert fn(c) == pytest.approx(fn.fallback(c), rel=1e-12)


def test_constants_are_fast():
    start = time.perf_counter()
    cubic_lattice_tau_limit()
    ice_ic_tau()
    triangular_tau_limit()
    assert time.perf_counter() - start < 10 * (1 if _accel.HAVE_NUMBA else 3)
