"""Shared constructions for treasury tests."""
import random

from girthforge.graph import complete_graph, empty_graph, graph_from_mask_edges
from girthforge.treasury import ConfigurationHypergraph, Treasury, design_treasury

PASCH_K6 = [(0, 1, 2), (0, 3, 4), (1, 3, 5), (2, 4, 5)]


def pasch_treasury():
    """Design treasury of K_6 whose H is exactly one Pasch edge."""
    G = complete_graph(6)
    T = design_treasury(G, G, 3, empty_graph(6), 4)
    idx = T.index
    F = [idx.lookup(b) for b in PASCH_K6]
    H = ConfigurationHypergraph(len(idx), frozenset(), (frozenset(F),), 3, 4)
    return Treasury(idx, 3, 4, T.G1, T.G2, H, {}), F


def toy_treasury(seed, n=None):
    """Random host on <= 8 vertices with a materialized girth-4 H, plus its lazy twin."""
    rng = random.Random(seed)
    n = n or rng.randint(6, 8)
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < 0.85]
    G = graph_from_mask_edges(n, edges)
    T = design_treasury(G, G, 3, empty_graph(n), 4, h_limit=None, h_time_limit=None)
    H = T.H
    lazy = ConfigurationHypergraph(H.universe, H.deleted, None, H.i_min, H.i_max, H.backgrounds, True)
    return T, Treasury(T.index, T.q, T.g, T.G1, T.G2, lazy, T.notes), rng
