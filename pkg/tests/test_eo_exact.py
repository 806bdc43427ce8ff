import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iceentropy.eo_exact import (
    CensusTable,
    census_brute,
    eo_count,
    eo_count_brute,
    orientation_census,
    partition_count,
    partition_sum_exact,
    partition_trail_histogram,
    perfect_matchings,
    rt,
    rt_via_eo,
)
from iceentropy.errors import GraphError, ResourceLimitError
from iceentropy.generators import clique, clique_cycle, cycle, hypercube, torus, triangular_torus
from iceentropy.graph import Graph, disjoint_union, subdivide_edge
from oracles import edges_of, eo_brute, imbalance_census, partition_sum_brute

KNOWN_RT = {1: 1, 3: 2, 5: 24, 7: 2640, 9: 3230080, 11: 48251508480, 13: 9307700611292160}

NAMED = {
    "K3": lambda: clique(3),
    "K5": lambda: clique(5),
    "K7": lambda: clique(7),
    "C3xC3": lambda: torus([3, 3]),
    "C3xC4": lambda: torus([3, 4]),
    **{f"C{n}": (lambda n=n: cycle(n)) for n in range(3, 11)},
}


@st.composite
def even_multigraphs(draw, max_n=7, max_cycles=5):
    """Unions of random closed walks: every degree is even."""
    n = draw(st.integers(3, max_n))
    edges = []
    for _ in range(draw(st.integers(1, max_cycles))):
        walk = draw(st.lists(st.integers(0, n - 1), min_size=2, max_size=6))
        walk.append(walk[0])
        edges += [(a, b) for a, b in zip(walk, walk[1:]) if a != b]
    g = Graph(n, edges)
    used = np.flatnonzero(g.degrees)
    relabel = {int(v): i for i, v in enumerate(used)}
    return Graph(len(used), [(relabel[u], relabel[v], k) for (u, v), k in g.edge_items])


@pytest.mark.parametrize("name", sorted(NAMED))
def test_eo_count_against_frozen_oracle(name, frozen):
    assert eo_count(NAMED[name]()) == frozen["eo"][name]


@given(even_multigraphs())
@settings(max_examples=80, deadline=None)
def test_frontier_matches_enumeration(g):
    if g.num_edges == 0 or g.num_edges > 16:
        return
    assert eo_count(g) == eo_brute(g.n, edges_of(g)) == eo_count_brute(g)


@given(even_multigraphs(), st.randoms(use_true_random=False))
@settings(max_examples=40, deadline=None)
def test_count_independent_of_vertex_order(g, rnd):
    if g.num_edges == 0:
        return
    order = list(range(g.n))
    rnd.shuffle(order)
    assert eo_count(g, order=order) == eo_count(g)


def test_odd_degree_gives_zero():
    assert eo_count(clique(4)) == 0
    assert eo_count(Graph(3, [(0, 1), (1, 2)])) == 0


def test_multigraph_counts():
    assert eo_count(Graph(2, [(0, 1, 4)])) == 6
    assert eo_count(Graph(3, [(0, 1, 2), (1, 2, 2), (0, 2, 2)])) == eo_brute(3, [(0, 1), (0, 1), (1, 2), (1, 2), (0, 2), (0, 2)])


def test_resource_limit():
    with pytest.raises(ResourceLimitError):
        eo_count(torus([12, 12]), max_slots=6)


def test_larger_exact_counts():
    assert eo_count(hypercube(4)) == 2970
    assert math.log(eo_count(hypercube(4))) / 16 == pytest.approx(0.499770, abs=5e-6)
    assert eo_count(clique_cycle(3, 4)) == eo_count(torus([3, 4]))


def test_multiplicativity_and_subdivision_corpus():
    corpus = [cycle(3), cycle(6), clique(5), torus([3, 3]), triangular_torus(3, 3), Graph(2, [(0, 1, 4)])]
    for i, a in enumerate(corpus):
        b = corpus[(i + 1) % len(corpus)]
        assert eo_count(disjoint_union(a, b)) == eo_count(a) * eo_count(b)
        (u, v), _ = a.edge_items[0]
        assert eo_count(subdivide_edge(a, (u, v))) == eo_count(a)


@pytest.mark.parametrize("name", ["C3", "C4", "K5"])
def test_census_against_frozen_oracle(name, frozen):
    g = {"C3": cycle(3), "C4": cycle(4), "K5": clique(5)}[name]
    table = orientation_census(g)
    expected = {tuple(k): v for k, v in frozen["census"][name]}
    assert dict(table.items()) == expected
    assert census_brute(g) == expected


@given(even_multigraphs(max_n=6, max_cycles=3))
@settings(max_examples=40, deadline=None)
def test_census_property(g):
    if g.num_edges == 0 or g.num_edges > 12:
        return
    table = orientation_census(g)
    expected = imbalance_census(g.n, edges_of(g))
    assert dict(table.items()) == expected
    assert table[(0,) * g.n] == eo_count(g)
    for z, c in list(expected.items())[:5]:
        assert table[tuple(-x for x in z)] == c  # reversing every edge


def test_census_encoding():
    z = (2, 0, -2, 0)
    t = CensusTable(4, np.array([CensusTable.encode(z)]), np.array([7]))
    assert t.decode(CensusTable.encode(z)) == z
    assert t[z] == 7 and t[(0, 0, 0, 0)] == 0 and t[(4, 0, -4, 0)] == 0
    assert t.lookup(np.array([CensusTable.encode(z), 0])).tolist() == [7, 0]


@pytest.mark.parametrize("m", sorted(KNOWN_RT))
def test_regular_tournaments(m):
    assert rt(m) == KNOWN_RT[m]


@pytest.mark.parametrize("m", [3, 5, 7, 9])
def test_rt_two_routes(m):
    assert rt_via_eo(m) == rt(m)


def test_rt_errors():
    with pytest.raises(GraphError):
        rt(4)
    with pytest.raises(ResourceLimitError):
        rt(27)


def test_perfect_matchings():
    ms = list(perfect_matchings(range(6)))
    assert len(ms) == 15
    assert len({tuple(sorted(map(tuple, map(sorted, m)))) for m in ms}) == 15


@pytest.mark.parametrize("name", ["C3", "C4", "C5", "C6", "K5", "C3xC3"])
def test_partition_sum_against_frozen_oracle(name, frozen):
    g = {"C3": cycle(3), "C4": cycle(4), "C5": cycle(5), "C6": cycle(6), "K5": clique(5), "C3xC3": torus([3, 3])}[name]
    s, count = frozen["partition_sum"][name]
    assert partition_count(g) == count
    assert partition_sum_exact(g) == s


@given(even_multigraphs(max_n=5, max_cycles=3))
@settings(max_examples=30, deadline=None)
def test_partition_identity_property(g):
    """Sum of 2^|P| over partitions equals EO times prod (d/2)!."""
    if g.num_edges == 0 or partition_count(g) > 5000:
        return
    weight = math.prod(math.factorial(int(d) // 2) for d in g.degrees)
    assert partition_sum_exact(g) == eo_count(g) * weight
    assert partition_sum_brute(g.n, edges_of(g))[0] == partition_sum_exact(g)


def test_histogram_paths_agree():
    g = torus([3, 3])
    hist = partition_trail_histogram(g)
    assert hist.sum() == partition_count(g)
    assert sum(int(c) << k for k, c in enumerate(hist.tolist())) == partition_sum_exact(g)


def test_partition_limit():
    with pytest.raises(ResourceLimitError):
        partition_sum_exact(torus([4, 4]), limit=1000)
    with pytest.raises(GraphError):
        partition_count(clique(4))
