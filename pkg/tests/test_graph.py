import itertools

import pytest
from hypothesis import given, settings, strategies as st

from girthforge.errors import DuplicateEdge, InputError, NotAClique, SelfLoop, VertexOutOfRange
from girthforge.graph import (Config, clique_index, cliques_through, complete_graph, cycle_graph,
                              enumerate_cliques, format_graph, graham_blowup, is_divisible, max_degree,
                              min_degree, new_graph, parse_graph)
from oracles import binom, naive_cliques


def test_new_graph_basics():
    K3 = new_graph(3, [(0, 1), (0, 2), (1, 2)])
    assert K3.edge_count == 3
    C6 = new_graph(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)])
    assert C6.degrees() == [2] * 6
    assert new_graph(1, []).edge_count == 0


@pytest.mark.parametrize("edges,exc", [([(0, 5)], VertexOutOfRange), ([(0, 1), (1, 0)], DuplicateEdge),
                                       ([(2, 2)], SelfLoop)])
def test_new_graph_rejects(edges, exc):
    with pytest.raises(exc):
        new_graph(3, edges)


def test_divisibility_examples():
    assert is_divisible(complete_graph(7), 3)
    assert is_divisible(cycle_graph(6), 3)
    assert not is_divisible(complete_graph(6), 3)


def test_divisibility_of_complete_graphs():
    for n in range(3, 101):
        assert is_divisible(complete_graph(n), 3) == (n % 6 in (1, 3)), n


def test_clique_counts():
    assert len(enumerate_cliques(complete_graph(5), 3)) == 10
    assert enumerate_cliques(cycle_graph(6), 3) == []
    K7 = enumerate_cliques(complete_graph(7), 3)
    assert len(K7) == 35
    per_edge = {}
    for c in K7:
        for e in itertools.combinations(c.vertices, 2):
            per_edge[e] = per_edge.get(e, 0) + 1
    assert set(per_edge.values()) == {5}
    assert [c.id for c in K7] == list(range(35))
    assert [c.vertices for c in K7] == sorted(c.vertices for c in K7)


def test_cliques_through_examples():
    assert len(cliques_through(complete_graph(7), (0, 1), 3)) == 5
    assert cliques_through(cycle_graph(6), (0, 1), 3) == []
    assert len(cliques_through(complete_graph(9), (0,), 3)) == 28
    with pytest.raises(NotAClique):
        cliques_through(cycle_graph(6), (0, 2), 3)


def test_degrees():
    assert (min_degree(complete_graph(7)), max_degree(complete_graph(7))) == (6, 6)
    assert (min_degree(cycle_graph(6)), max_degree(cycle_graph(6))) == (2, 2)
    G = graham_blowup(9)
    assert G.n == 36 and (min_degree(G), max_degree(G)) == (26, 26)


def test_complete_clique_counts_formula():
    for n in range(1, 13):
        for q in range(2, 6):
            assert len(enumerate_cliques(complete_graph(n), q)) == binom(n, q)


graphs = st.integers(1, 12).flatmap(lambda n: st.tuples(
    st.just(n), st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1))
                        .filter(lambda e: e[0] < e[1]), max_size=n * (n - 1) // 2)))


@settings(max_examples=80, deadline=None)
@given(graphs, st.integers(3, 4))
def test_enumeration_matches_oracle(g, q):
    n, edges = g
    G = new_graph(n, sorted(edges))
    assert sorted(c.vertices for c in enumerate_cliques(G, q)) == naive_cliques(n, edges, q)
    assert sum(G.degrees()) == 2 * G.edge_count
    for e in sorted(edges)[:5]:
        through = sorted(c.vertices for c in cliques_through(G, e, q))
        assert through == [c for c in naive_cliques(n, edges, q) if set(e) <= set(c)]


def test_text_round_trip():
    G = graham_blowup(3)
    assert parse_graph(format_graph(G)) == G
    assert parse_graph("# comment\n3 2\n0 1\n1 2 # trailing\n").edge_count == 2
    with pytest.raises(InputError):
        parse_graph("3 2\n0 1\n")
    with pytest.raises(InputError):
        parse_graph("")


def test_clique_index_lookup():
    idx = clique_index(complete_graph(6), 3)
    for cid in range(len(idx)):
        assert idx.lookup(idx.vertices(cid)) == cid
    assert len(idx.through((0, 1))) == 4


def test_config_validation():
    Config()
    with pytest.raises(InputError):
        Config(q=2)
    with pytest.raises(InputError):
        Config(rng_seed=-1)
