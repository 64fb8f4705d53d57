"""Brute-force reference implementations used by the tests."""
import itertools
from math import comb


def naive_girth(blocks, q, g_max):
    """Smallest i in [2, g_max] with i blocks spanning <= i(q-2)+2 vertices."""
    blocks = [tuple(b) for b in blocks]
    for i in range(2, g_max + 1):
        for sub in itertools.combinations(blocks, i):
            if len(set().union(*sub)) <= i * (q - 2) + 2:
                return i
    return None


def naive_cliques(n, edges, q):
    E = {tuple(sorted(e)) for e in edges}
    return [S for S in itertools.combinations(range(n), q)
            if all(p in E for p in itertools.combinations(S, 2))]


def cover_counts(blocks):
    cnt = {}
    for b in blocks:
        for e in itertools.combinations(sorted(b), 2):
            cnt[e] = cnt.get(e, 0) + 1
    return cnt


def is_exact_cover(n, edges, blocks):
    cnt = cover_counts(blocks)
    return cnt == {tuple(sorted(e)): 1 for e in edges}


def pasch_families(n):
    """Sets of 4 pairwise edge-disjoint triangles on exactly 6 vertices of K_n."""
    out = set()
    for S in itertools.combinations(range(n), 6):
        tris = list(itertools.combinations(S, 3))
        for fam in itertools.combinations(tris, 4):
            if len(set().union(*fam)) != 6:
                continue
            if all(len(set(a) & set(b)) <= 1 for a, b in itertools.combinations(fam, 2)):
                out.add(frozenset(fam))
    return out


def sts_count(n):
    return n * (n - 1) // 6


def binom(n, k):
    return comb(n, k)
