import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from girthforge.errors import Infeasible, InputError
from girthforge.fractional import (FractionalWeighting, balanced_decomposition, check_certificate,
                                   seeded_decomposition, seeded_fixed, solve_fractional, uniform_weighting,
                                   verify_fractional)
from girthforge.graph import complete_graph, cycle_graph, disjoint_union
from girthforge.lp import certificate_holds, exact_simplex, feasible_point
from oracles import naive_cliques


def boundary(G, w):
    """Recompute boundaries from vertex tuples only."""
    idx = w.index
    out = {e: Fraction(0) for e in G.edges()}
    for c, v in w.weights.items():
        for e in itertools.combinations(idx.vertices(c), 2):
            out[e] += v
    return out


def certificate_is_valid(G, q, cert):
    """sum_e y_e > max over cliques of y(K) * (unbounded nonneg weights) means every clique sum <= 0."""
    y = {tuple(sorted(e)): Fraction(v) for e, v in cert.items()}
    for K in naive_cliques(G.n, G.edges(), q):
        if sum(y.get(e, 0) for e in itertools.combinations(K, 2)) > 0:
            return False
    return sum(y.values()) > 0


def test_k7_feasible():
    G = complete_graph(7)
    w = solve_fractional(G, 3)
    assert set(boundary(G, w).values()) == {1}
    assert verify_fractional(G, uniform_weighting(G, 3, Fraction(1, 5))).worst_edge_defect == 0


def test_c6_infeasible_with_certificate():
    with pytest.raises(Infeasible) as exc:
        solve_fractional(cycle_graph(6), 3)
    assert certificate_is_valid(cycle_graph(6), 3, exc.value.certificate)


@pytest.mark.parametrize("n", [7, 9, 13])
def test_uniform_has_zero_defect(n):
    G = complete_graph(n)
    rep = verify_fractional(G, uniform_weighting(G, 3, Fraction(1, n - 2)))
    assert rep.worst_edge_defect == 0
    assert rep.min_scaled == rep.max_scaled == 1


def test_zero_weighting_defect_one():
    G = complete_graph(7)
    assert verify_fractional(G, FractionalWeighting(G, 3, {})).worst_edge_defect == 1


def test_max_min_on_k9_minus_matching():
    G = complete_graph(9).without_edges([(0, 1), (2, 3), (4, 5), (6, 7)])
    w = solve_fractional(G, 3, objective="max_min")
    rep = verify_fractional(G, w)
    assert rep.worst_edge_defect == 0
    assert rep.min_scaled > 0


def test_max_min_value_on_k7():
    w = solve_fractional(complete_graph(7), 3, objective="max_min")
    assert min(w.weights.values()) == Fraction(1, 5)


def test_seeded_decomposition():
    w = seeded_decomposition(complete_graph(7), 3)
    assert min(w.weights.get(c, 0) for c in range(35)) >= Fraction(1, 35)
    w9 = seeded_decomposition(complete_graph(9), 3)
    assert verify_fractional(complete_graph(9), w9).worst_edge_defect == 0
    opt = solve_fractional(complete_graph(9), 3, objective="max_min")
    assert min(w9.weights.get(c, 0) for c in range(84)) <= min(opt.weights.get(c, 0) for c in range(84))
    assert min(w9.weights.get(c, 0) for c in range(84)) > 0
    with pytest.raises(Infeasible):
        seeded_decomposition(cycle_graph(6), 3)


def test_seeded_fixed_exact_targets():
    G = complete_graph(7)
    w = seeded_fixed(G, 3, {e: Fraction(20, 21) for e in G.edges()})
    assert set(boundary(G, w).values()) == {Fraction(20, 21)}
    w1 = seeded_fixed(G, 3, {e: 1 for e in G.edges()})
    assert verify_fractional(G, w1).worst_edge_defect == 0


def test_seeded_fixed_averaging_identity():
    G = complete_graph(7)
    rng = random.Random(5)
    targets = {e: 1 - Fraction(rng.randint(0, 4), 4 * 21) for e in G.edges()}
    w = seeded_fixed(G, 3, targets)
    E = G.edge_count
    phi0 = w.parts["base"]
    ex = {}
    for e, (lam, phi_e) in w.parts["edges"].items():
        for c, v in phi0.weights.items():
            ex[c] = ex.get(c, 0) + lam * v / E
        if phi_e is not None:
            for c, v in phi_e.weights.items():
                ex[c] = ex.get(c, 0) + (1 - lam) * v / E
    assert {c: v for c, v in ex.items() if v} == {c: v for c, v in w.weights.items() if v}
    b = boundary(G, w)
    assert all(b[e] == targets[e] for e in G.edges())


def test_seeded_fixed_mixed_targets_k9():
    G = complete_graph(9)
    rng = random.Random(2)
    targets = {e: 1 - Fraction(rng.randint(0, 3), 3 * 36) for e in G.edges()}
    w = seeded_fixed(G, 3, targets)
    assert boundary(G, w) == targets


def test_seeded_fixed_rejects_out_of_range():
    G = complete_graph(7)
    with pytest.raises(InputError):
        seeded_fixed(G, 3, {(0, 1): Fraction(1, 2)})


def test_balanced_k11_exhaustive():
    G = complete_graph(11)
    w = balanced_decomposition(G, 3, 7)
    rep = verify_fractional(G, w)
    assert rep.worst_edge_defect == 0
    assert rep.min_scaled > 0


def test_balanced_single_subset_is_seeded_fixed():
    G = complete_graph(9)
    w = balanced_decomposition(G, 3, 9)
    assert verify_fractional(G, w).worst_edge_defect == 0
    assert w.notes["qualifying"] == 1


def test_balanced_sampled_with_repair():
    G = complete_graph(13).without_edges([(0, 1), (0, 2), (1, 2)])
    w = balanced_decomposition(G, 3, 8, subsets=200, seed=1)
    assert verify_fractional(G, w).worst_edge_defect <= Fraction(1, 20)


def test_component_local():
    K7 = complete_graph(7)
    w1 = solve_fractional(K7, 3)
    G = disjoint_union(K7, complete_graph(3))
    w2 = solve_fractional(G, 3)
    assert {w1.index.vertices(c): v for c, v in w1.weights.items()} == \
        {w2.index.vertices(c): v for c, v in w2.weights.items() if max(w2.index.vertices(c)) < 7}


def test_support_and_box():
    G = complete_graph(7)
    with pytest.raises(Infeasible) as exc:
        solve_fractional(G, 3, support=[(0, 1, 2)])
    assert check_certificate(G, 3, exc.value.certificate, support=[(0, 1, 2)])
    with pytest.raises(Infeasible):
        solve_fractional(G, 3, box=(0, Fraction(1, 10)))
    with pytest.raises(InputError):
        solve_fractional(G, 3, box=(1, 0))


def test_json_round_trip():
    G = complete_graph(7)
    w = solve_fractional(G, 3)
    assert FractionalWeighting.from_json(w.to_json(), G).weights == w.weights


systems = st.integers(2, 6).flatmap(lambda m: st.tuples(
    st.just(m),
    st.lists(st.sets(st.integers(0, m - 1), min_size=1, max_size=3).map(sorted), min_size=1, max_size=8),
    st.lists(st.integers(0, 3), min_size=m, max_size=m)))


@settings(max_examples=80, deadline=None)
@given(systems)
def test_lp_answers_agree_with_exact_simplex(sys_):
    m, cols, rhs = sys_
    rhs = [Fraction(r) for r in rhs]
    a = feasible_point(cols, m, rhs)
    b = exact_simplex(cols, m, rhs)
    assert a.feasible == b.feasible
    if a.feasible:
        for r in range(m):
            assert sum(a.x[c] for c, col in enumerate(cols) if r in col) == rhs[r]
        assert all(x >= 0 for x in a.x)
    else:
        assert certificate_holds(cols, m, rhs, a.y)
        assert certificate_holds(cols, m, rhs, b.y)
