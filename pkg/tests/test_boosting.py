import itertools
import random

import pytest

from girthforge.boosting import k_q2_census, restricted_boost, sample_reserves
from girthforge.errors import InputError, SearchFailure
from girthforge.graph import clique_index, complete_graph, max_degree


def test_reserves_k60():
    R = sample_reserves(complete_graph(60), 3, 0.4, random.Random(0))
    assert max_degree(R.X) <= 48
    assert R.per_edge_min_extensions >= R.threshold


def test_reserves_p_one_and_tiny():
    G = complete_graph(12)
    assert sample_reserves(G, 3, 1.0).X == G
    with pytest.raises(SearchFailure) as exc:
        sample_reserves(complete_graph(30), 3, 0.01, random.Random(0))
    assert exc.value.stats["worst_edge"] is not None


def test_reserves_reproducible():
    G = complete_graph(25)
    assert sample_reserves(G, 3, 0.5, seed=9).X == sample_reserves(G, 3, 0.5, seed=9).X
    with pytest.raises(InputError):
        sample_reserves(G, 3, 0)


def test_boost_k20_without_forbidden():
    J = complete_graph(20)
    fam = restricted_boost(J, 3, (), seed=1)
    assert min(fam.coverage().values()) >= 1
    assert fam.max_deviation >= 0 and fam.target_d > 0


def test_boost_avoids_forbidden():
    J = complete_graph(20)
    idx = clique_index(J, 3)
    rng = random.Random(3)
    F = rng.sample(range(len(idx)), 10)
    fam = restricted_boost(J, 3, F, rng=rng)
    assert not fam.cliques & set(F)
    assert min(fam.coverage().values()) >= 1


def test_boost_rejects_dense_forbidden_edge():
    J = complete_graph(20)
    F = [tuple(sorted((0, 1, v))) for v in range(2, 20)]
    with pytest.raises(InputError):
        restricted_boost(J, 3, F)


def test_census_members_are_fully_present():
    J = complete_graph(10)
    idx = clique_index(J, 3)
    rng = random.Random(0)
    H = {c for c in range(len(idx)) if rng.random() < 0.8}
    Q = k_q2_census(idx, H, 3)
    for big in itertools.combinations(range(10), 5):
        inside = all(idx.id_of[s] in H for s in itertools.combinations(big, 3))
        assert inside == (big in Q)
