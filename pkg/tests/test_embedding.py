import itertools
import random

import pytest

from girthforge.embedding import SupergraphSystem, count_embeddings, embed_system, verify_embedding
from girthforge.errors import InputError, SearchFailure
from girthforge.gadgets import IdAllocator, fake_edge, g_sphere
from girthforge.graph import complete_graph, graph_from_mask_edges


def brute_count(W, G, forbidden=frozenset()):
    roots = set(W.roots)
    others = [v for v in range(G.n) if v not in roots]
    internal = list(W.internal)
    total = 0
    for img in itertools.permutations(others, len(internal)):
        m = dict(zip(internal, img))
        ok = True
        for u, v in W.edges:
            a, b = m.get(u, u), m.get(v, v)
            if not G.has_edge(a, b) or (min(a, b), max(a, b)) in forbidden:
                ok = False
                break
        total += ok
    return total


def circulant(n, d):
    edges = set()
    for v in range(n):
        for k in range(1, d // 2 + 1):
            w = (v + k) % n
            edges.add((min(v, w), max(v, w)))
    return graph_from_mask_edges(n, edges)


def test_count_embeddings_matches_bruteforce():
    W = fake_edge((0, 1), 3, IdAllocator(10))
    assert count_embeddings(W, complete_graph(10)) == brute_count(W, complete_graph(10)) == 8 * 7 * 6


def test_count_embeddings_with_forbidden_and_sparse_host():
    rng = random.Random(4)
    K = complete_graph(9)
    G = K.without_edges([e for e in K.edges() if rng.random() < 0.3 and e != (0, 1)])
    W = fake_edge((0, 1), 3, IdAllocator(9))
    forb = {e for e in G.edges() if rng.random() < 0.2}
    assert count_embeddings(W, G, graph_from_mask_edges(9, forb)) == brute_count(W, G, forb)


def test_count_embeddings_zero_when_no_common_neighbours():
    G = graph_from_mask_edges(6, [(0, 1), (0, 2), (1, 3)])
    assert count_embeddings(fake_edge((0, 1), 3, IdAllocator(6)), G) == 0


def test_count_embeddings_sphere_lower_bound():
    W = g_sphere((0, 1, 2), 2, IdAllocator(12)).gadget
    c = count_embeddings(W, complete_graph(12), cap=10 ** 6)
    assert c == brute_count(W, complete_graph(12)) == 9 * 8 * 7
    assert c >= (0.5 * 12) ** len(W.internal)


def test_empty_system_is_identity():
    J = complete_graph(6)
    emb = embed_system(SupergraphSystem(J, [], 1), complete_graph(10))
    assert emb.max_degree() == 0 and emb.image.edge_count == 0


def test_single_gadget_without_room_fails():
    J = graph_from_mask_edges(4, [(0, 1)])
    G = graph_from_mask_edges(4, [(0, 1), (0, 2), (1, 3)])
    W = fake_edge((0, 1), 3, IdAllocator(4))
    with pytest.raises(SearchFailure) as exc:
        embed_system(SupergraphSystem(J, [(((0, 1),), W)], 5), G)
    assert exc.value.stats.get("constraint") == "A" or "A" in str(exc.value)


def test_system_validation():
    J = graph_from_mask_edges(5, [(0, 1)])
    W = fake_edge((0, 1), 3, IdAllocator(5))
    with pytest.raises(InputError):
        SupergraphSystem(J, [(((0, 2),), W)], 5)
    with pytest.raises(InputError):
        SupergraphSystem(J, [(((0, 1),), W)], 2)


def _system(seed, n=120, members=30):
    rng = random.Random(seed)
    K = complete_graph(n)
    J = circulant(n, 6)
    G = K.without_edges([e for e in K.edges() if rng.random() < 0.2 and not J.has_edge(*e)])
    fresh = IdAllocator(n)
    fam = [((e,), fake_edge(e, 3, fresh)) for e in rng.sample(J.edges(), members)]
    return SupergraphSystem(J, fam, 5), G


@pytest.mark.parametrize("seed", range(5))
def test_embedding_verified_and_bounded(seed):
    S, G = _system(seed)
    emb = embed_system(S, G, 50, seed=seed)
    assert verify_embedding(S, G, emb) == []
    assert emb.max_degree() <= 50 * 6
    J = S.base
    assert not set(emb.image.edges()) & set(J.edges())


def test_embedding_deterministic():
    S, G = _system(11)
    a = embed_system(S, G, 50, seed=3)
    b = embed_system(S, G, 50, seed=3)
    assert a.vertex_map == b.vertex_map


def test_verify_embedding_catches_reuse():
    S, G = _system(2, members=2)
    emb = embed_system(S, G, 50, seed=0)
    W = S.family[1][1]
    broken = dict(emb.vertex_map)
    broken[W.internal[0]] = emb.vertex_map[S.family[0][1].internal[0]]
    emb.vertex_map = broken
    assert verify_embedding(S, G, emb)
