"""Reserve sampling and restricted regularity boosting.

Reserves: a random sparse subgraph X such that every edge outside X closes
many cliques with X.  Boosting: starting from a balanced fractional
decomposition, produce a random clique family avoiding a forbidden set in
which every edge lies in roughly the same number of cliques.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import Infeasible, InputError, SearchFailure
from .fractional import FractionalWeighting, solve_fractional, verify_fractional
from .graph import Graph, _clique_tuples, clique_index, graph_from_mask_edges, max_degree


@dataclass
class ReserveSample:
    X: Graph
    p: float
    per_edge_min_extensions: int
    threshold: float
    attempts: int = 1
    worst_edge: tuple | None = None

    def to_json(self) -> dict:
        return {"p": self.p, "edges": [list(e) for e in self.X.edges()], "max_degree": max_degree(self.X),
                "per_edge_min_extensions": self.per_edge_min_extensions, "threshold": self.threshold,
                "attempts": self.attempts}


def extension_threshold(n: int, q: int, p: float) -> float:
    return (1 / (q + 1) ** q) * p ** (q * (q - 1) // 2 - 1) * math.comb(n, q - 2)


def _extensions(X: Graph, u: int, v: int, q: int) -> int:
    common = X.adj[u] & X.adj[v]
    if q == 3:
        return common.bit_count()
    return len(_clique_tuples(X, q - 2, cand=common))


def check_reserves(G: Graph, X: Graph, q: int, p: float, threshold: float):
    """(ok, min extensions, worst edge, max degree ok)."""
    deg_ok = max_degree(X) <= 2 * p * G.n if X.edge_count else True
    worst, worst_e = None, None
    for u, v in G.edges():
        if X.has_edge(u, v):
            continue
        k = _extensions(X, u, v, q)
        if worst is None or k < worst:
            worst, worst_e = k, (u, v)
    if worst is None:
        return deg_ok, 0, None, deg_ok
    return deg_ok and worst >= threshold, worst, worst_e, deg_ok


def sample_reserves(G: Graph, q: int = 3, p: float = 0.4, rng=None, max_retries: int = 20, threshold=None,
                    seed: int = 0) -> ReserveSample:
    """Edge-independent sample X of G, resampled until both checks pass."""
    if not 0 < p <= 1:
        raise InputError("p must lie in (0, 1]")
    rng = rng or random.Random(seed)
    thr = extension_threshold(G.n, q, p) if threshold is None else float(threshold)
    edges = G.edges()
    last = None
    for attempt in range(1, max_retries + 1):
        X = graph_from_mask_edges(G.n, [e for e in edges if p >= 1 or rng.random() < p])
        ok, worst, worst_e, deg_ok = check_reserves(G, X, q, p, thr)
        last = (worst, worst_e, deg_ok, max_degree(X))
        if ok:
            return ReserveSample(X, p, worst, thr, attempt, worst_e)
    raise SearchFailure("reserve sampling exhausted its retries",
                        {"worst_extensions": last[0], "worst_edge": last[1], "degree_ok": last[2],
                         "max_degree": last[3], "threshold": thr, "attempts": max_retries})


@dataclass
class RegularFamily:
    host: Graph
    q: int
    cliques: frozenset
    target_d: float
    max_deviation: float
    stats: dict = field(default_factory=dict)

    def coverage(self) -> dict:
        idx = clique_index(self.host, self.q)
        edges = self.host.edges()
        cnt = {e: 0 for e in edges}
        for c in self.cliques:
            for e in idx.edge_sets[c]:
                cnt[edges[e]] += 1
        return cnt

    def to_json(self) -> dict:
        idx = clique_index(self.host, self.q)
        return {"q": self.q, "blocks": [list(idx.vertices(c)) for c in sorted(self.cliques)],
                "target_d": self.target_d, "max_deviation": self.max_deviation, "stats": self.stats}


def _forbidden_ids(idx, F_orb):
    out = set()
    for F in F_orb:
        out.add(F if isinstance(F, int) else idx.lookup(F))
    return out


def k_q2_census(idx, H: set, q: int):
    """K_{q+2} copies all of whose q-subsets are in H (by clique id)."""
    G = idx.graph
    found = []
    for big in _clique_tuples(G, q + 2):
        if all(idx.id_of[sub] in H for sub in itertools.combinations(big, q)):
            found.append(big)
    return found


def restricted_boost(J: Graph, q: int = 3, F_orb=(), C_balance=None, rng=None, seed: int = 0,
                     alpha: float = 0.25, phi: FractionalWeighting | None = None, census: bool = True,
                     max_widen: int = 8) -> RegularFamily:
    """Near-regular clique family of J avoiding ``F_orb``.

    Steps: balanced weighting phi (max-min LP unless supplied); zero the
    forbidden weights; sample H with probability phi*d, d = C(n-2,q-2)/C;
    re-weight on H with every weight in a box around 1/d (box widened
    geometrically while infeasible); final sample with probability
    (2/3)*psi*d.  Uncovered edges are patched with their heaviest
    permitted clique and the patches are counted."""
    rng = rng or random.Random(seed)
    idx = clique_index(J, q)
    n = J.n
    edges = J.edges()
    forb = _forbidden_ids(idx, F_orb)
    base = math.comb(n - 2, q - 2)
    per_edge = [0] * J.edge_count
    for F in forb:
        for e in idx.edge_sets[F]:
            per_edge[e] += 1
    for e, k in enumerate(per_edge):
        if k > alpha * base:
            raise InputError(f"edge {edges[e]} has {k} forbidden cliques, more than alpha*C(n-2,q-2)")
    if phi is None:
        phi = solve_fractional(J, q, objective="max_min")
    rep = verify_fractional(J, phi)
    C = Fraction(C_balance) if C_balance is not None else max(rep.max_scaled, Fraction(1))
    d = Fraction(base) / C
    clamps = 0
    H = set()
    for c in range(len(idx)):
        if c in forb:
            continue
        pr = phi.weights.get(c, Fraction(0)) * d
        if pr > 1:
            clamps += 1
            pr = Fraction(1)
        if pr and (pr == 1 or rng.random() < pr):
            H.add(c)
    patches_h = 0
    for e in range(J.edge_count):
        if not any(c in H for c in idx.by_edge[e]):
            allowed = [c for c in idx.by_edge[e] if c not in forb]
            if not allowed:
                raise SearchFailure(f"edge {edges[e]} has no permitted clique")
            H.add(max(allowed, key=lambda c: (phi.weights.get(c, Fraction(0)), -c)))
            patches_h += 1
    Q = k_q2_census(idx, H, q) if census else []
    lo, hi = 1 / (2 * d), 3 / (2 * d)
    psi = None
    factor = Fraction(1)
    for step in range(max_widen + 1):
        box = (lo / factor, hi * factor) if step < max_widen else (0, None)
        try:
            psi = solve_fractional(J, q, support=H, box=box)
            break
        except Infeasible:
            factor *= 2
    if psi is None:
        raise SearchFailure("re-weighting LP failed at every widening", {"H": len(H)})
    widen = str(factor) if step < max_widen else "unbounded"
    fam = set()
    for c in H:
        pr = Fraction(2, 3) * psi.weights.get(c, Fraction(0)) * d
        if pr > 1:
            clamps += 1
            pr = Fraction(1)
        if pr and (pr == 1 or rng.random() < pr):
            fam.add(c)
    patches = 0
    for e in range(J.edge_count):
        if not any(c in fam for c in idx.by_edge[e]):
            cands = [c for c in idx.by_edge[e] if c in H]
            fam.add(max(cands, key=lambda c: (psi.weights.get(c, Fraction(0)), -c)))
            patches += 1
    if fam & forb:
        raise SearchFailure("internal error: family meets the forbidden set")
    target = float(Fraction(2, 3) * d)
    cnt = [0] * J.edge_count
    for c in fam:
        for e in idx.edge_sets[c]:
            cnt[e] += 1
    dev = max((abs(k - target) for k in cnt), default=0.0)
    stats = {"d": str(d), "C": str(C), "H_size": len(H), "H_patches": patches_h, "Q_count": len(Q),
             "box_widening": widen, "clamped": clamps, "patches": patches, "forbidden": len(forb),
             "phi_min_scaled": str(rep.min_scaled), "phi_max_scaled": str(rep.max_scaled)}
    return RegularFamily(J, q, frozenset(fam), target, dev, stats)
