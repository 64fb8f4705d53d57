import random

import pytest

from girthforge.errors import InputError
from girthforge.graph import clique_index, complete_graph, cycle_graph, empty_graph, graph_from_mask_edges
from girthforge.treasury import (Treasury, check_regular, common_projection, design_hypergraph,
                                 design_treasury, divisible_subgraphs, reserve_hypergraph)
from fixtures import pasch_treasury


def test_design_hypergraph_counts():
    H = design_hypergraph(complete_graph(5), 3)
    assert len(H.vertices) == 10 and len(H.edges) == 10 and all(len(e) == 3 for e in H.edges)
    assert design_hypergraph(cycle_graph(6), 3).edges == ()
    H7 = design_hypergraph(complete_graph(7), 3)
    assert len(H7.vertices) == 21 and len(H7.edges) == 35
    assert set(H7.degree_map().values()) == {5}


def test_reserve_hypergraph_examples():
    G = complete_graph(4)
    eid = G.edge_ids()
    U = {eid[(0, 1)]}
    W = set(eid.values()) - U
    H = reserve_hypergraph(G, 3, U, W)
    idx = clique_index(G, 3)
    assert sorted(idx.vertices(c) for c in H.labels) == [(0, 1, 2), (0, 1, 3)]
    assert reserve_hypergraph(G, 3, U, set()).edges == ()
    U2 = {eid[(0, 1)], eid[(0, 2)]}
    H2 = reserve_hypergraph(G, 3, U2, set(eid.values()) - U2)
    assert (0, 1, 2) not in [idx.vertices(c) for c in H2.labels]


def test_design_treasury_k7():
    G = complete_graph(7)
    X = graph_from_mask_edges(7, [(0, 1), (0, 2), (1, 2)])
    T = design_treasury(G, G, 3, X, 4)
    assert len(T.A) == 18 and len(T.B) == 3
    assert T.H.edges
    assert design_treasury(G, G, 3, X, 3).H.edges == ()
    T0 = design_treasury(G, G, 3, empty_graph(7), 4)
    assert not T0.B and len(T0.G1.edges) == 35


def test_check_regular_empty_h_passes_rt3_rt4():
    G = complete_graph(7)
    T = design_treasury(G, G, 3, empty_graph(7), 3)
    rep = check_regular(T, 5, 0.5, 0.125, 0.25)
    assert rep["RT3"]["pass"] and rep["RT4"]["pass"]
    assert rep["RT1"]["pass"]


def test_check_regular_rt2_witness():
    G = complete_graph(7)
    X = graph_from_mask_edges(7, [(0, 1), (0, 2), (1, 2)])
    T = design_treasury(G, G, 3, X, 3)
    G2 = T.G2
    eid = G.edge_ids()
    victim = eid[(3, 4)]
    keep = [c for e, c in zip(G2.edges, G2.labels) if victim not in e]
    T2 = Treasury(T.index, 3, 3, T.G1, G2.restricted(keep), T.H, {})
    rep = check_regular(T2, 5, 0.5, 0.125, 0.25)
    assert not rep["RT2"]["pass"]
    assert rep["RT2"]["min_A_degree"] == 0


def test_check_regular_k40_reserve_audit():
    rng = random.Random(0)
    G = complete_graph(40)
    X = graph_from_mask_edges(40, [e for e in G.edges() if rng.random() < 0.25])
    T = design_treasury(G, G, 3, X, 4, h_time_limit=1.0)
    rep = check_regular(T, 40, 0.5, 1 / 8, 0.25, lazy_sample=2, lazy_time=5.0)
    assert set(rep) >= {"RT1", "RT2", "RT3", "RT4", "pass"}
    assert rep["RT1"]["max_degree"] <= 40
    assert rep["log"] == "natural"
    assert rep["RT4"]["exact"] is False


def test_projection_identity():
    T, F = pasch_treasury()
    P = common_projection(T, [frozenset()])
    assert P.H.edges == T.H.edges and P.H.deleted == T.H.deleted
    again = common_projection(P, [frozenset()])
    assert again.H.edges == P.H.edges


def test_projection_deletes_f1():
    T, F = pasch_treasury()
    P = common_projection(T, [frozenset(F[1:])])
    assert P.H.deleted == {F[0]}
    assert F[0] not in P.G1.labels
    assert set(P.G1.labels) <= set(T.G1.labels)


def test_projection_adds_pair():
    T, F = pasch_treasury()
    P = common_projection(T, [frozenset(F[2:])])
    assert frozenset(F[:2]) in P.H.edges
    assert not P.H.deleted


def test_projection_rejects_non_matching():
    T, F = pasch_treasury()
    idx = T.index
    with pytest.raises(InputError):
        common_projection(T, [frozenset({idx.lookup((0, 1, 2)), idx.lookup((0, 1, 3))})])


def test_divisible_subgraphs_c6_plus_triangle():
    X = graph_from_mask_edges(9, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5), (6, 7), (7, 8), (6, 8)])
    subs = divisible_subgraphs(X, 3)
    assert [s.edge_count for s in subs] == [0, 3, 6, 9]
    assert divisible_subgraphs(graph_from_mask_edges(3, [(0, 1)]), 3)[0].edge_count == 0
    assert len(divisible_subgraphs(graph_from_mask_edges(3, [(0, 1)]), 3)) == 1


def test_divisible_subgraphs_match_bruteforce():
    rng = random.Random(1)
    for _ in range(10):
        edges = [(u, v) for u in range(6) for v in range(u + 1, 6) if rng.random() < 0.5]
        X = graph_from_mask_edges(6, edges)
        fast = {frozenset(s.edges()) for s in divisible_subgraphs(X, 3)}
        slow = set()
        for mask in range(2 ** len(edges)):
            sub = [e for i, e in enumerate(edges) if mask >> i & 1]
            deg = [0] * 6
            for u, v in sub:
                deg[u] += 1
                deg[v] += 1
            if len(sub) % 3 == 0 and all(d % 2 == 0 for d in deg):
                slow.add(frozenset(sub))
        assert fast == slow


def test_summary_and_incidence():
    T, F = pasch_treasury()
    s = T.summary()
    assert s["H_edges"] == 1
    assert T.incidence_lines().strip()
