import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from girthforge.errors import InputError
from girthforge.gadgets import (IdAllocator, RootedBooster, RootedGadget, anti_edge, behaves_like_edge,
                                booster_defects, check_absorber, divisibility_residues, fake_edge, find_absorber,
                                g_sphere, rooted_degeneracy, rooted_degeneracy_bruteforce, rooted_girth,
                                rooted_girth_bruteforce, verify_absorber, verify_booster)
from girthforge.girth import Packing
from girthforge.graph import cycle_graph, empty_graph, new_graph
from oracles import is_exact_cover


def sphere(g):
    return g_sphere((0, 1, 2), g, IdAllocator(3))


@pytest.mark.parametrize("g", range(2, 7))
def test_sphere_shape(g):
    B = sphere(g)
    assert verify_booster(B)
    assert len(B.on) == 2 * g and len(B.off) == 2 * g - 1
    assert B.gadget.edge_count() == 6 * g - 3
    assert not set(B.on) & set(B.off)
    assert rooted_degeneracy(B.gadget) == 4
    assert rooted_girth(B) == 2 * g


def test_sphere_three_counts():
    B = sphere(3)
    assert len(B.gadget.vertices) == 8
    assert B.gadget.edge_count() == 15


@pytest.mark.parametrize("g", range(2, 5))
def test_sphere_rooted_girth_oracle(g):
    assert rooted_girth_bruteforce(sphere(g)) == 2 * g


def test_sphere_decompositions_by_cover_oracle():
    B = sphere(4)
    body = list(B.gadget.edges)
    root = list(itertools.combinations(B.root, 2))
    assert is_exact_cover(0, body, B.off)
    assert is_exact_cover(0, body + root, B.on)


def test_sphere_rejects_bad_root():
    with pytest.raises(InputError):
        g_sphere((0, 1), 3, IdAllocator(3))
    with pytest.raises(InputError):
        g_sphere((0, 1, 2), 1, IdAllocator(3))


def _fano_pair():
    """Two Fano planes on 0..6: one through (0,1,3), one avoiding it, with no common line."""
    tris = list(itertools.combinations(range(7), 3))
    planes = []
    for fam in itertools.combinations(tris, 7):
        cnt = set()
        ok = True
        for b in fam:
            for e in itertools.combinations(b, 2):
                if e in cnt:
                    ok = False
                    break
                cnt.add(e)
            if not ok:
                break
        if ok:
            planes.append(fam)
        if len(planes) >= 30:
            break
    R = (0, 1, 3)
    for a in planes:
        if R not in a:
            continue
        off = [b for b in a if b != R]
        for on in planes:
            if R not in on and not set(on) & set(off):
                return R, list(on), off
    raise AssertionError("no pair")


def test_degenerate_booster_with_pasch():
    R, on, off = _fano_pair()
    body = frozenset(e for b in off for e in itertools.combinations(b, 2))
    W = RootedGadget(R, (2, 4, 5, 6), body, "Booster")
    B = RootedBooster(W, R, Packing(on), Packing(off))
    assert verify_booster(B)
    assert rooted_girth(B) == 4
    assert rooted_girth_bruteforce(B) == 4


def test_booster_defects_detect_broken_off():
    B = sphere(2)
    bad = RootedBooster(B.gadget, B.root, B.on, Packing(list(B.off)[1:]))
    assert booster_defects(bad)
    with pytest.raises(InputError):
        rooted_girth(bad)


@pytest.mark.parametrize("q,internal,edges", [(3, 1, 2), (4, 2, 5), (5, 3, 9)])
def test_anti_edge_counts(q, internal, edges):
    W = anti_edge((0, 1), q, IdAllocator(2))
    assert len(W.internal) == internal and W.edge_count() == edges


def test_fake_edge_q3():
    W = fake_edge((0, 1), 3, IdAllocator(2))
    assert len(W.internal) == 3 and W.edge_count() == 4
    assert rooted_degeneracy(W) == 2
    assert rooted_degeneracy_bruteforce(W) == 2


@pytest.mark.parametrize("q", [3, 4, 5])
def test_fake_edge_congruences(q):
    W = fake_edge((0, 1), q, IdAllocator(2))
    r = divisibility_residues(W, q)
    assert r["edges"] == 1
    assert set(r["roots"].values()) == {1 % (q - 1)}
    assert set(r["internal"].values()) <= {0}
    assert behaves_like_edge(W, q)
    assert rooted_degeneracy(W) <= q - 1
    assert len(W.vertices) <= q ** 3 and W.edge_count() <= q ** 4


def test_degeneracy_of_path():
    W = RootedGadget((0,), (1, 2, 3), frozenset({(0, 1), (1, 2), (2, 3)}), "Booster")
    assert rooted_degeneracy(W) == 1


def random_gadget(rng, n_int, density):
    roots = (0, 1)
    internal = tuple(range(2, 2 + n_int))
    edges = set()
    for u, v in itertools.combinations(range(2 + n_int), 2):
        if (u, v) != (0, 1) and rng.random() < density:
            edges.add((u, v))
    return RootedGadget(roots, internal, frozenset(edges), "Booster")


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 9), st.integers(1, 7), st.floats(0.2, 0.9))
def test_degeneracy_peeling_matches_bruteforce_and_is_monotone(seed, k, density):
    rng = random.Random(seed)
    W = random_gadget(rng, k, density)
    d = rooted_degeneracy(W)
    assert d == rooted_degeneracy_bruteforce(W)
    if W.edges:
        e = rng.choice(sorted(W.edges))
        smaller = RootedGadget(W.roots, W.internal, W.edges - {e}, W.kind)
        assert rooted_degeneracy_bruteforce(smaller) <= d


def test_verify_absorber_examples():
    B = sphere(2)
    L = new_graph(3, [(0, 1), (0, 2), (1, 2)])
    assert verify_absorber(B.gadget, L)
    empty = RootedGadget(tuple(range(6)), (), frozenset(), "Absorber")
    assert not verify_absorber(empty, cycle_graph(6))


def test_find_absorber_triangle_is_sphere():
    L = new_graph(3, [(0, 1), (0, 2), (1, 2)])
    A = find_absorber(L, 3)
    assert A.source == "sphere"
    assert len(A.gadget.internal) == 3
    assert check_absorber(A)


def test_find_absorber_c6_verifies():
    A = find_absorber(cycle_graph(6), 3, seed=1)
    assert len(A.gadget.internal) <= 14
    assert check_absorber(A)
    assert verify_absorber(A.gadget, cycle_graph(6))


def test_find_absorber_by_random_search():
    A = find_absorber(cycle_graph(6), 3, seed=3, library=False, time_budget=60)
    assert A.source == "search"
    assert verify_absorber(A.gadget, cycle_graph(6))


def test_find_absorber_empty_and_non_divisible():
    A = find_absorber(empty_graph(4), 3)
    assert A.source == "empty" and not A.gadget.edges
    with pytest.raises(InputError):
        find_absorber(new_graph(3, [(0, 1)]), 3)


def test_gadget_json_round_trip():
    B = sphere(3)
    assert RootedBooster.from_json(B.to_json()) == B
    W = fake_edge((0, 1), 4, IdAllocator(2))
    assert RootedGadget.from_json(W.to_json()) == W
    with pytest.raises(InputError):
        RootedGadget.from_json({"roots": []})
