"""Treasuries: (design hypergraph, reserve hypergraph, configuration hypergraph).

Vertices of the design and reserve hypergraphs are edge ids of the host
graph, and every hyperedge is labelled by the id of the clique it comes from
(ids are positions in ``clique_index(G, q)``).  The configuration hypergraph
lives on clique ids.  When there are too many configurations to list, the
configuration hypergraph is kept *lazy*: it is described by the forbidden
size range plus the projection family, and conflicts are detected on demand
by the matcher.
"""
from __future__ import annotations

import itertools
import json
import time
from dataclasses import dataclass, field
from decimal import Decimal, getcontext
from fractions import Fraction

from .errors import ConfigurationOverflow, InputError
from .girth import connected_sets, enumerate_erdos_configurations
from .graph import Graph, clique_index, graph_from_mask_edges, is_divisible


@dataclass(frozen=True)
class Hypergraph:
    vertices: frozenset
    edges: tuple  # frozensets of vertices
    labels: tuple  # clique id per edge
    parts: tuple | None = None  # (A, B) for bipartite hypergraphs

    def degree_map(self) -> dict:
        deg = dict.fromkeys(self.vertices, 0)
        for e in self.edges:
            for v in e:
                deg[v] = deg.get(v, 0) + 1
        return deg

    def restricted(self, keep_labels) -> "Hypergraph":
        keep = set(keep_labels)
        pairs = [(e, c) for e, c in zip(self.edges, self.labels) if c in keep]
        return Hypergraph(self.vertices, tuple(e for e, _ in pairs), tuple(c for _, c in pairs), self.parts)


def design_hypergraph(G: Graph, q: int) -> Hypergraph:
    index = clique_index(G, q)
    verts = frozenset(range(G.edge_count))
    return Hypergraph(verts, tuple(frozenset(es) for es in index.edge_sets), tuple(range(len(index))))


def _edge_id_set(host: Graph, edges) -> frozenset:
    eid = host.edge_ids()
    out = set()
    for u, v in edges:
        key = (min(u, v), max(u, v))
        if key not in eid:
            raise InputError(f"{key} is not an edge of the host")
        out.add(eid[key])
    return frozenset(out)


def reserve_hypergraph(G: Graph, q: int, U, W) -> Hypergraph:
    """Cliques of G with exactly one edge in U and the others in W.

    ``U`` and ``W`` are edge-id sets (or graphs on the same vertex set)."""
    U = _as_edge_ids(G, U)
    W = _as_edge_ids(G, W)
    if U & W:
        raise InputError("U and W overlap")
    index = clique_index(G, q)
    edges, labels = [], []
    for cid, es in enumerate(index.edge_sets):
        inU = sum(1 for e in es if e in U)
        if inU == 1 and all(e in U or e in W for e in es):
            edges.append(frozenset(es))
            labels.append(cid)
    return Hypergraph(U | W, tuple(edges), tuple(labels), (U, W))


def _as_edge_ids(G: Graph, obj) -> frozenset:
    if isinstance(obj, Graph):
        return _edge_id_set(G, obj.edges())
    return frozenset(obj)


@dataclass(frozen=True)
class ConfigurationHypergraph:
    """Vertices: clique ids of the host minus ``deleted``.

    Either ``edges`` lists the hyperedges, or ``lazy`` is set and edges are
    implicit: a set P of non-deleted cliques is an edge when, for some member
    M of ``backgrounds``, P is disjoint from M, |P| >= 2, and P together
    with part of M is a minimal configuration with ``i_min <= i <= i_max``.
    """

    universe: int
    deleted: frozenset = frozenset()
    edges: tuple | None = ()
    i_min: int = 3
    i_max: int = 3
    backgrounds: tuple = (frozenset(),)
    lazy: bool = False

    def vertices(self) -> frozenset:
        return frozenset(range(self.universe)) - self.deleted


@dataclass
class Treasury:
    index: object  # CliqueIndex of the host G
    q: int
    g: int
    G1: Hypergraph
    G2: Hypergraph
    H: ConfigurationHypergraph
    notes: dict = field(default_factory=dict)

    @property
    def A(self) -> frozenset:
        return self.G2.parts[0] if self.G2.parts else self.G1.vertices

    @property
    def B(self) -> frozenset:
        return self.G2.parts[1] if self.G2.parts else frozenset()

    def design_ids(self) -> list:
        return list(self.G1.labels)

    def reserve_ids(self) -> list:
        return list(self.G2.labels)

    def summary(self) -> dict:
        H = self.H
        return {
            "q": self.q,
            "g": self.g,
            "A": len(self.A),
            "B": len(self.B),
            "G1_edges": len(self.G1.edges),
            "G2_edges": len(self.G2.edges),
            "H_vertices": H.universe - len(H.deleted),
            "H_deleted": len(H.deleted),
            "H_mode": "lazy" if H.lazy else "materialized",
            "H_edges": None if H.lazy else len(H.edges),
            "H_i_range": [H.i_min, H.i_max],
            "projection_family": len(H.backgrounds),
            **self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), sort_keys=True)

    def incidence_lines(self) -> str:
        """Line-based dump for debugging: one hyperedge per line."""
        out = []
        for e, c in zip(self.G1.edges, self.G1.labels):
            out.append("G1 %d : %s" % (c, " ".join(map(str, sorted(e)))))
        for e, c in zip(self.G2.edges, self.G2.labels):
            out.append("G2 %d : %s" % (c, " ".join(map(str, sorted(e)))))
        if not self.H.lazy:
            for e in self.H.edges:
                out.append("H : %s" % " ".join(map(str, sorted(e))))
        return "\n".join(out) + "\n"


def girth_hypergraph(G: Graph, q: int, g: int, limit: int | None = 20000, time_limit: float | None = 5.0):
    """Materialized configuration hypergraph, or a lazy one when the
    enumeration exceeds ``limit`` configurations or ``time_limit`` seconds."""
    index = clique_index(G, q)
    if g < 3:
        return ConfigurationHypergraph(len(index), edges=(), i_min=3, i_max=g), 0
    try:
        ws = _timed_erdos(G, q, g, limit, time_limit)
    except ConfigurationOverflow as exc:
        return ConfigurationHypergraph(len(index), edges=None, i_min=3, i_max=g, lazy=True), exc.count
    edges = tuple(frozenset(c.id for c in w.cliques) for w in ws)
    return ConfigurationHypergraph(len(index), edges=edges, i_min=3, i_max=g), len(edges)


def _timed_erdos(G, q, g, limit, time_limit):
    if time_limit is None:
        return enumerate_erdos_configurations(G, q, g, limit)
    from . import girth as _g

    start = time.monotonic()
    index = clique_index(G, q)
    masks = index.vertex_masks
    by_vertex = {v: lst for v, lst in enumerate(index.by_vertex)}
    oracle = _g._MinimalityOracle(index, q)
    out = []
    steps = 0
    for sub, span in connected_sets(masks, by_vertex, g, g * (q - 2) + 2, edge_disjoint=True):
        steps += 1
        if steps % 4096 == 0 and time.monotonic() - start > time_limit:
            raise ConfigurationOverflow("time limit while enumerating configurations", len(out), out)
        i = len(sub)
        if i < 3 or span.bit_count() != i * (q - 2) + 2:
            continue
        ids = frozenset(sub)
        if oracle.has_smaller(ids):
            continue
        out.append(_g.ConfigurationWitness(tuple(index.cliques[c] for c in sorted(ids)), frozenset(), i))
        if limit is not None and len(out) > limit:
            raise ConfigurationOverflow(f"more than {limit} configurations", len(out), out)
    return out


def design_treasury(G: Graph, G_prime: Graph, q: int, X: Graph, g: int, h_limit: int | None = 20000,
                    h_time_limit: float | None = 5.0) -> Treasury:
    """(Design(G' minus X), Reserve(G, G' minus X -> X), girth-g configurations of G)."""
    if not X.is_subgraph_of(G_prime) or not G_prime.is_subgraph_of(G):
        raise InputError("need X inside G' inside G")
    X = X.resized(G.n)
    G_prime = G_prime.resized(G.n)
    index = clique_index(G, q)
    U = _edge_id_set(G, G_prime.difference(X).edges())
    W = _edge_id_set(G, X.edges())
    g1_edges, g1_labels = [], []
    for cid, es in enumerate(index.edge_sets):
        if all(e in U for e in es):
            g1_edges.append(frozenset(es))
            g1_labels.append(cid)
    G1 = Hypergraph(U, tuple(g1_edges), tuple(g1_labels))
    G2 = reserve_hypergraph(G, q, U, W)
    H, count = girth_hypergraph(G, q, g, h_limit, h_time_limit)
    notes = {"H_enumerated": count}
    return Treasury(index, q, g, G1, G2, H, notes)


# regularity audit

def _le_power(x: int, D: int, num: int, den: int) -> bool:
    """Exact test x <= D**(num/den) for integers x >= 0, D >= 1, den >= 1."""
    if num < 0:
        return x ** den * D ** (-num) <= 1
    return x ** den <= D ** num


def _frac(x) -> Fraction:
    return Fraction(str(x)) if isinstance(x, float) else Fraction(x)


def _max_witness(counter: dict):
    if not counter:
        return 0, None
    key = max(counter, key=lambda k: (counter[k], repr(k)))
    return counter[key], key


def _h_edges_for_audit(T: Treasury, sample=None, time_limit=None):
    """(edges, exact, truncated).  Lazy treasuries are sampled by root and
    optionally cut off after ``time_limit`` seconds."""
    if not T.H.lazy:
        return list(T.H.edges), True, False
    from .matcher import _lazy_edges_through

    verts = sorted(set(T.G1.labels) | set(T.G2.labels))
    if sample is not None:
        step = max(1, -(-len(verts) // sample))
        verts = verts[::step]
    deadline = None if time_limit is None else time.monotonic() + time_limit
    found = set()
    for v in verts:
        edges, cut = _lazy_edges_through(T, v, deadline)
        found.update(edges)
        if cut:
            return list(found), False, True
    return list(found), False, False


def check_regular(T: Treasury, D, sigma, beta, alpha, lazy_sample: int = 40, lazy_time: float | None = 30.0) -> dict:
    """Evaluate RT1-RT4 exactly, with a maximizing witness per inequality.

    Lazy configuration hypergraphs are audited on a sample of roots, so
    RT3/RT4 then rest on lower bounds and are reported with exact=False."""
    D = int(D)
    sigma = _frac(sigma)
    beta = _frac(beta)
    alpha = _frac(alpha)
    report = {"parameters": {"D": D, "sigma": str(sigma), "beta": str(beta), "alpha": str(alpha)},
              "log": "natural"}
    A, B = T.A, T.B
    deg1 = T.G1.degree_map()
    deg2 = T.G2.degree_map()

    m, w = _max_witness({v: deg1.get(v, 0) for v in T.G1.vertices})
    low = {v: deg1.get(v, 0) for v in A}
    lo_v = min(low, key=lambda v: (low[v], v)) if low else None
    rt1 = m <= D and (lo_v is None or low[lo_v] >= D - sigma)
    report["RT1"] = {"pass": rt1, "max_degree": m, "max_witness": w,
                     "min_A_degree": low.get(lo_v) if lo_v is not None else None, "min_witness": lo_v}

    mb, wb = _max_witness({v: deg2.get(v, 0) for v in B})
    one_minus_a = 1 - alpha
    low2 = {v: deg2.get(v, 0) for v in A}
    lo2 = min(low2, key=lambda v: (low2[v], v)) if low2 else None
    ok_low = True
    if lo2 is not None:
        x = low2[lo2]
        # x >= D^(1-alpha)  <=>  not (x < D^(1-alpha))
        ok_low = x ** one_minus_a.denominator >= D ** one_minus_a.numerator if one_minus_a >= 0 else True
    rt2 = mb <= D and ok_low
    report["RT2"] = {"pass": rt2, "max_B_degree": mb, "max_witness": wb,
                     "min_A_degree": low2.get(lo2) if lo2 is not None else None, "min_witness": lo2}

    exp = 1 - beta
    codeg: dict = {}
    for e in T.G1.edges + T.G2.edges:
        for a, b in itertools.combinations(sorted(e), 2):
            codeg[(a, b)] = codeg.get((a, b), 0) + 1
    c_max, c_w = _max_witness(codeg)
    Hedges, exact, truncated = _h_edges_for_audit(T, lazy_sample, lazy_time)
    rows = set(T.G1.labels) | set(T.G2.labels)
    esets = T.index.edge_sets
    two = [tuple(e) for e in Hedges if len(e) == 2]
    co2: dict = {}
    nbr: dict = {}
    for F1, F2 in two:
        nbr.setdefault(F1, set()).add(F2)
        nbr.setdefault(F2, set()).add(F1)
        for F, Fe in ((F1, F2), (F2, F1)):
            if F not in rows or Fe not in rows:
                continue
            for e in esets[Fe]:
                if e not in esets[F]:
                    co2[(e, F)] = co2.get((e, F), 0) + 1
    k_max, k_w = _max_witness(co2)
    common: dict = {}
    for F, ns in nbr.items():
        for F1, F2 in itertools.combinations(sorted(ns), 2):
            if F1 in rows and F2 in rows and not set(esets[F1]) & set(esets[F2]):
                common[(F1, F2)] = common.get((F1, F2), 0) + 1
    d_max, d_w = _max_witness(common)
    rt3 = all(_le_power(x, D, exp.numerator, exp.denominator) for x in (c_max, k_max, d_max))
    report["RT3"] = {"pass": rt3, "codegree": c_max, "codegree_witness": c_w, "two_codegree": k_max,
                     "two_codegree_witness": k_w, "common_two_degree": d_max, "common_witness": d_w,
                     "bound": float(D) ** float(exp)}

    getcontext().prec = 60
    lnD = Decimal(D).ln() if D > 1 else Decimal(0)
    by_size: dict = {}
    for e in Hedges:
        by_size.setdefault(len(e), []).append(tuple(sorted(e)))
    rt4 = {"pass": True, "exact": exact, "truncated": truncated, "per_s": {}}
    for s in range(2, T.g + 1):
        es = by_size.get(s, [])
        entry = {}
        d1: dict = {}
        for e in es:
            for v in e:
                d1[v] = d1.get(v, 0) + 1
        x, wit = _max_witness(d1)
        bound = Decimal(alpha.numerator) / Decimal(alpha.denominator) * Decimal(D) ** (s - 1) * lnD
        ok = Decimal(x) <= bound
        entry["delta_1"] = {"value": x, "witness": wit, "bound": float(bound), "pass": ok}
        rt4["pass"] &= ok
        for t in range(2, s):
            dt: dict = {}
            for e in es:
                for sub in itertools.combinations(e, t):
                    dt[sub] = dt.get(sub, 0) + 1
            x, wit = _max_witness(dt)
            ex = s - t - beta
            ok = _le_power(x, D, ex.numerator, ex.denominator)
            entry[f"delta_{t}"] = {"value": x, "witness": wit, "bound": float(D) ** float(ex), "pass": ok}
            rt4["pass"] &= ok
        rt4["per_s"][s] = entry
    report["RT4"] = rt4
    report["pass"] = rt1 and rt2 and rt3 and rt4["pass"]
    return report


# projections

def _check_matching(T: Treasury, M) -> None:
    rows = set(T.G1.labels) | set(T.G2.labels)
    seen = set()
    for c in M:
        if c in rows:
            for e in T.index.edge_sets[c]:
                if e in seen:
                    raise InputError(f"projection member is not a matching (edge id {e} repeated)")
                seen.add(e)


def common_projection(T: Treasury, M_family) -> Treasury:
    """Delete cliques that complete a configuration with some M alone, and
    shrink configurations by the parts lying in some M."""
    fam = tuple(frozenset(M) for M in M_family)
    for M in fam:
        _check_matching(T, M)
    H = T.H
    if H.lazy:
        if any(H.backgrounds) and fam != (frozenset(),):
            raise InputError("nested projection of a lazy configuration hypergraph is not supported")
        if fam == (frozenset(),):
            fam = H.backgrounds
        from .matcher import lazy_deleted

        deleted = H.deleted | lazy_deleted(T.index, T.q, fam, H.i_min, H.i_max, H.deleted)
        newH = ConfigurationHypergraph(H.universe, deleted, None, H.i_min, H.i_max, fam, True)
    else:
        deleted = set(H.deleted)
        for Z in H.edges:
            for M in fam:
                rest = Z - M
                if len(rest) == 1:
                    deleted |= rest
        deleted = frozenset(deleted)
        new_edges = set()
        for Z in H.edges:
            for M in fam:
                P = Z - M
                if len(P) >= 2 and not (P & deleted):
                    new_edges.add(P)
        newH = ConfigurationHypergraph(H.universe, deleted, tuple(sorted(new_edges, key=sorted)), H.i_min,
                                       H.i_max, fam, False)
    keep1 = [c for c in T.G1.labels if c not in newH.deleted]
    keep2 = [c for c in T.G2.labels if c not in newH.deleted]
    notes = dict(T.notes)
    notes["projected_by"] = len(fam)
    return Treasury(T.index, T.q, T.g, T.G1.restricted(keep1), T.G2.restricted(keep2), newH, notes)


def divisible_subgraphs(X: Graph, q: int, cap: int = 2 ** 20) -> list:
    """All K_q-divisible subgraphs of X (including the empty one)."""
    edges = X.edges()
    if q == 3:
        # even subgraphs form the cycle space; keep those with 3 | e
        parent = list(range(X.n))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        tree, extra = [], []
        for e in edges:
            a, b = find(e[0]), find(e[1])
            if a == b:
                extra.append(e)
            else:
                parent[a] = b
                tree.append(e)
        if 2 ** len(extra) > cap:
            raise ConfigurationOverflow("too many divisible subgraphs", 2 ** len(extra))
        basis = [_fundamental_cycle(tree, e) for e in extra]
        out = []
        for mask in range(2 ** len(basis)):
            cyc = frozenset()
            for i, c in enumerate(basis):
                if mask >> i & 1:
                    cyc = cyc ^ c
            if len(cyc) % 3 == 0:
                out.append(graph_from_mask_edges(X.n, sorted(cyc)))
        out.sort(key=lambda g: (g.edge_count, g.edges()))
        return out
    if 2 ** len(edges) > cap:
        raise ConfigurationOverflow("too many edge subsets", 2 ** len(edges))
    out = []
    for mask in range(2 ** len(edges)):
        sub = graph_from_mask_edges(X.n, [e for i, e in enumerate(edges) if mask >> i & 1])
        if is_divisible(sub, q):
            out.append(sub)
    out.sort(key=lambda g: (g.edge_count, g.edges()))
    return out


def _fundamental_cycle(tree, e):
    adj: dict = {}
    for a, b in tree:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    src, dst = e
    prev = {src: None}
    stack = [src]
    while stack:
        v = stack.pop()
        if v == dst:
            break
        for w in adj.get(v, ()):
            if w not in prev:
                prev[w] = v
                stack.append(w)
    path = set()
    v = dst
    while prev[v] is not None:
        path.add((min(v, prev[v]), max(v, prev[v])))
        v = prev[v]
    path.add((min(e), max(e)))
    return frozenset(path)


def omniabsorber_projection(A, G: Graph, X: Graph, g: int, h_limit: int | None = 20000,
                            h_time_limit: float | None = 5.0) -> Treasury:
    """Design treasury of (G, G minus A, X) projected by every Q_A(L)."""
    q = A.q
    index = clique_index(G, q)
    fam = []
    for L in A.divisible_subsets():
        fam.append(frozenset(index.lookup(b) for b in A.decompose(L).blocks))
    T = design_treasury(G, G.difference(A.A.resized(G.n)), q, X, g, h_limit, h_time_limit)
    return common_projection(T, fam)
