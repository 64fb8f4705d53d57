"""Fractional clique decompositions with exact rational weights.

A weighting assigns a non-negative rational to every q-clique of the host;
it is a fractional decomposition when the weights of the cliques through
each edge sum to exactly 1 (the *boundary* of the edge).
"""
from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from . import lp
from .errors import Infeasible, InputError, SearchFailure
from .graph import Graph, clique_index, enumerate_cliques, graph_from_mask_edges, min_degree


@dataclass
class FractionalWeighting:
    host: Graph
    q: int
    weights: dict  # clique id -> Fraction
    notes: dict = field(default_factory=dict)
    parts: dict | None = field(default=None, repr=False)

    @property
    def index(self):
        return clique_index(self.host, self.q)

    def weight(self, block) -> Fraction:
        return self.weights.get(self.index.lookup(block), Fraction(0))

    def boundary(self) -> dict:
        """Edge (u, v) -> exact sum of weights of cliques through it."""
        idx = self.index
        edges = self.host.edges()
        out = {e: Fraction(0) for e in edges}
        for cid, w in self.weights.items():
            if w:
                for e in idx.edge_sets[cid]:
                    out[edges[e]] += w
        return out

    def support(self) -> list:
        return sorted(c for c, w in self.weights.items() if w > 0)

    def scaled(self, factor) -> "FractionalWeighting":
        f = Fraction(factor)
        return FractionalWeighting(self.host, self.q, {c: w * f for c, w in self.weights.items()}, dict(self.notes))

    def to_json(self) -> dict:
        idx = self.index
        rows = []
        for cid in sorted(self.weights):
            w = self.weights[cid]
            if w:
                rows.append({"block": list(idx.vertices(cid)), "num": w.numerator, "den": w.denominator})
        return {"q": self.q, "weights": rows}

    @classmethod
    def from_json(cls, data, host: Graph) -> "FractionalWeighting":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            q = int(data["q"])
            idx = clique_index(host, q)
            weights = {}
            for row in data["weights"]:
                w = Fraction(int(row["num"]), int(row["den"]))
                if w < 0:
                    raise InputError("negative weight")
                weights[idx.lookup(row["block"])] = w
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"malformed weighting JSON: {exc}") from None
        return cls(host, q, weights)


def _combine(host, q, terms) -> dict:
    out = {}
    for coef, w in terms:
        if not coef:
            continue
        for c, v in w.weights.items():
            if v:
                out[c] = out.get(c, Fraction(0)) + coef * v
    return out


@dataclass(frozen=True)
class BalanceReport:
    min_scaled: Fraction
    max_scaled: Fraction
    worst_edge_defect: Fraction
    worst_edge: tuple | None
    support: int

    def to_json(self) -> dict:
        return {"min_scaled": str(self.min_scaled), "max_scaled": str(self.max_scaled),
                "worst_edge_defect": str(self.worst_edge_defect),
                "worst_edge": list(self.worst_edge) if self.worst_edge else None, "support": self.support}


def verify_fractional(G: Graph, w: FractionalWeighting) -> BalanceReport:
    """Exact boundaries recomputed from scratch (own clique enumeration)."""
    q = w.q
    idx = clique_index(G, q)
    by_block = {idx.vertices(c): v for c, v in w.weights.items()}
    for b, v in by_block.items():
        if v < 0:
            raise InputError(f"negative weight on {b}")
    bnd = {e: Fraction(0) for e in G.edges()}
    blocks = enumerate_cliques(G, q)
    vals = []
    for c in blocks:
        v = by_block.get(c.vertices, Fraction(0))
        vals.append(v)
        if v:
            for e in itertools.combinations(c.vertices, 2):
                bnd[e] += v
    scale = math.comb(max(G.n - 2, 0), q - 2)
    worst, worst_e = Fraction(0), None
    for e, s in bnd.items():
        d = abs(s - 1)
        if d > worst:
            worst, worst_e = d, e
    lo = min(vals) * scale if vals else Fraction(0)
    hi = max(vals) * scale if vals else Fraction(0)
    return BalanceReport(lo, hi, worst, worst_e, sum(1 for v in vals if v))


def _components(G: Graph):
    seen = [False] * G.n
    comps = []
    for s in range(G.n):
        if seen[s] or G.degree(s) == 0:
            continue
        stack, comp = [s], []
        seen[s] = True
        while stack:
            v = stack.pop()
            comp.append(v)
            for u in G.neighbors(v):
                if not seen[u]:
                    seen[u] = True
                    stack.append(u)
        comps.append(set(comp))
    return comps


def _box_of(box, cid):
    if box is None:
        return Fraction(0), None
    lo, hi = box[cid] if isinstance(box, dict) else box
    lo = Fraction(0) if lo is None else Fraction(lo)
    hi = None if hi is None else Fraction(hi)
    if lo < 0 or (hi is not None and hi < lo):
        raise InputError(f"inconsistent box {lo, hi}")
    return lo, hi


def solve_fractional(G: Graph, q: int = 3, support=None, box=None, objective: str = "feasible",
                     targets=None) -> FractionalWeighting:
    """Exact weighting with boundary 1 on every edge (or ``targets``).

    ``support`` restricts the cliques (ids or vertex tuples), ``box`` gives
    (lo, hi) bounds for all weights or per clique id, ``objective`` is
    "feasible" or "max_min".  Raises :class:`Infeasible` with a checked
    certificate.  Each connected component is solved on its own."""
    if objective not in ("feasible", "max_min"):
        raise InputError(f"unknown objective {objective}")
    if box is not None and not isinstance(box, dict):
        _box_of(box, 0)
    idx = clique_index(G, q)
    edges = G.edges()
    allowed = None
    if support is not None:
        allowed = set()
        for c in support:
            allowed.add(c if isinstance(c, int) else idx.lookup(c))
    rhs_of = {e: Fraction(1) for e in edges}
    if targets is not None:
        for e, t in targets.items():
            key = (min(e), max(e))
            if key not in rhs_of:
                raise InputError(f"target on non-edge {key}")
            rhs_of[key] = Fraction(t)
    weights = {}
    methods = []
    eids = G.edge_ids()
    for comp in _components(G):
        rows = [eids[e] for e in edges if e[0] in comp]
        pos = {e: i for i, e in enumerate(rows)}
        cids = sorted({c for e in rows for c in idx.by_edge[e] if allowed is None or c in allowed})
        cols = [[pos[e] for e in idx.edge_sets[c]] for c in cids]
        rhs = [rhs_of[edges[e]] for e in rows]
        lo = hi = None
        if box is not None:
            bx = [_box_of(box, c) for c in cids]
            lo = [b[0] for b in bx]
            hi = [b[1] for b in bx]
        if objective == "max_min" and box is None:
            res = lp.max_min_point(cols, len(rows), rhs)
        else:
            res = lp.feasible_point(cols, len(rows), rhs, lo, hi)
        methods.append(res.method)
        if not res.feasible:
            cert = {edges[rows[i]]: y for i, y in enumerate(res.y) if y}
            if not check_certificate(G, q, cert, support=allowed, box=box, targets=targets):
                raise SearchFailure("certificate failed independent re-check")
            raise Infeasible(f"no fractional K_{q}-decomposition (component of {min(comp)})", cert,
                             {"method": res.method})
        for c, v in zip(cids, res.x):
            if v:
                weights[c] = v
    return FractionalWeighting(G, q, weights, {"methods": sorted(set(methods))})


def check_certificate(G: Graph, q: int, certificate: dict, support=None, box=None, targets=None) -> bool:
    """Independent check: sup over allowed weights of sum_e y_e * boundary(e)
    is strictly below sum_e y_e * target(e)."""
    y = {}
    for e, v in certificate.items():
        key = (min(e), max(e))
        if not G.has_edge(*key):
            return False
        y[key] = Fraction(v)
    idx = clique_index(G, q)
    allowed = None
    if support is not None:
        allowed = {c if isinstance(c, int) else idx.lookup(c) for c in support}
    bound = Fraction(0)
    for c in enumerate_cliques(G, q):
        if allowed is not None and c.id not in allowed:
            continue
        a = sum((y.get(e, Fraction(0)) for e in itertools.combinations(c.vertices, 2)), Fraction(0))
        lo, hi = _box_of(box, c.id)
        if a > 0:
            if hi is None:
                return False
            bound += a * hi
        else:
            bound += a * lo
    tgt = {}
    if targets is not None:
        tgt = {(min(e), max(e)): Fraction(t) for e, t in targets.items()}
    total = sum((v * tgt.get(e, Fraction(1)) for e, v in y.items()), Fraction(0))
    return bound < total


def _lift(w: FractionalWeighting, G: Graph, mapping=None) -> dict:
    """Move weights of a subgraph (or relabelled copy) onto cliques of G."""
    idx = clique_index(G, w.q)
    src = w.index
    out = {}
    for c, v in w.weights.items():
        verts = src.vertices(c)
        if mapping is not None:
            verts = [mapping[x] for x in verts]
        out[idx.lookup(verts)] = v
    return out


def _greedy_classes(G: Graph, q: int, cap: int, rng) -> list[list[int]]:
    idx = clique_index(G, q)
    order = list(range(len(idx)))
    rng.shuffle(order)
    classes = []  # (members, used edges, vertex loads)
    for c in order:
        es = idx.edge_sets[c]
        vs = idx.vertices(c)
        for members, used, load in classes:
            if used.isdisjoint(es) and all(load.get(v, 0) < cap for v in vs):
                members.append(c)
                used.update(es)
                for v in vs:
                    load[v] = load.get(v, 0) + 1
                break
        else:
            classes.append(([c], set(es), {v: 1 for v in vs}))
    return [sorted(m) for m, _, _ in classes]


def seeded_decomposition(G: Graph, q: int = 3, epsilon: float = 0.1, rng=None, seed: int = 0) -> FractionalWeighting:
    """Fractional decomposition giving every clique positive weight.

    Cliques are coloured greedily into edge-disjoint classes with at most
    M cliques per vertex; for each class the rest of G is solved by LP and
    the class cliques get weight 1; the average of these decompositions
    puts weight >= 1/(number of classes) on every clique."""
    rng = rng or random.Random(seed)
    if G.edge_count == 0:
        return FractionalWeighting(G, q, {}, {"classes": 0})
    idx = clique_index(G, q)
    if not len(idx):
        solve_fractional(G, q)  # raises Infeasible with a certificate
    cap = max(1, int(epsilon * G.n / (2 * q)))
    classes = _greedy_classes(G, q, cap, rng)
    edges = G.edges()
    terms = []
    try:
        for members in classes:
            removed = {edges[e] for c in members for e in idx.edge_sets[c]}
            rest = G.without_edges(removed)
            part = {}
            if rest.edge_count:
                part = _lift(solve_fractional(rest, q), G)
            for c in members:
                part[c] = part.get(c, Fraction(0)) + 1
            terms.append(part)
    except Infeasible:
        w = solve_fractional(G, q, objective="max_min")
        w.notes.update({"classes": len(classes), "fallback": "max_min", "vertex_cap": cap})
        if not w.weights or len(w.support()) < len(idx):
            pass
        return w
    k = Fraction(1, len(terms))
    weights = {}
    for part in terms:
        for c, v in part.items():
            weights[c] = weights.get(c, Fraction(0)) + k * v
    w = FractionalWeighting(G, q, weights, {"classes": len(classes), "vertex_cap": cap})
    w.notes["min_weight"] = str(min(weights.get(c, Fraction(0)) for c in range(len(idx))))
    return w


def seeded_fixed(G: Graph, q: int = 3, targets=None, epsilon: float = 0.1, rng=None, seed: int = 0,
                 base: FractionalWeighting | None = None) -> FractionalWeighting:
    """Weighting with boundary exactly ``targets[e]`` for each edge, targets
    in [1 - 1/e(G), 1], built by mixing a seeded decomposition of G with
    decompositions of G - e."""
    E = G.edge_count
    edges = G.edges()
    if targets is None:
        targets = {}
    tg = {}
    for e in edges:
        tg[e] = Fraction(targets.get(e, targets.get((e[1], e[0]), 1)))
    for e in targets:
        if (min(e), max(e)) not in tg:
            raise InputError(f"target on non-edge {e}")
    low = 1 - Fraction(1, E) if E else Fraction(1)
    for e, t in tg.items():
        if not low <= t <= 1:
            raise InputError(f"target {t} for {e} outside [{low}, 1]")
    phi0 = base or seeded_decomposition(G, q, epsilon, rng=rng, seed=seed)
    terms = []
    parts = {"base": phi0, "edges": {}}
    for e in edges:
        lam = E * (tg[e] - low)
        phi_e = None
        if lam < 1:
            try:
                phi_e = solve_fractional(G.without_edges([e]), q, objective="max_min")
            except Infeasible as exc:
                raise Infeasible(f"G minus edge {e} has no fractional decomposition", exc.certificate) from None
            phi_e = FractionalWeighting(G, q, _lift(phi_e, G))
        parts["edges"][e] = (lam, phi_e)
        terms.append((lam / E, phi0))
        if phi_e is not None:
            terms.append(((1 - lam) / E, phi_e))
    w = FractionalWeighting(G, q, _combine(G, q, terms), {"targets_min": str(min(tg.values(), default=1))})
    w.parts = parts
    return w


def _induced_relabel(G: Graph, S):
    S = sorted(S)
    pos = {v: i for i, v in enumerate(S)}
    sub = [(pos[u], pos[v]) for u, v in G.edges() if u in pos and v in pos]
    return graph_from_mask_edges(len(S), sub), S


def balanced_decomposition(G: Graph, q: int = 3, s: int = 7, subsets="exhaustive", rng=None, seed: int = 0,
                           epsilon: float = 0.1, repair: bool = True, max_subsets: int = 20000) -> FractionalWeighting:
    """Average seeded-fixed weightings of many s-vertex induced subgraphs.

    ``subsets`` is "exhaustive" or an int k (k random s-subsets).  Targets
    are chosen from the realized subset multiset so that boundaries are
    exactly 1 whenever no target had to be clamped."""
    if s < q + 2:
        raise InputError("s must be at least q + 2")
    n = G.n
    if s > n:
        raise InputError("s exceeds the number of vertices")
    rng = rng or random.Random(seed)
    if subsets == "exhaustive":
        if math.comb(n, s) > max_subsets:
            raise InputError(f"C({n},{s}) subsets is too many; sample instead")
        pool = [tuple(S) for S in itertools.combinations(range(n), s)]
    else:
        k = int(subsets)
        pool = [tuple(sorted(rng.sample(range(n), s))) for _ in range(k)]
    dens = min_degree(G) / (n - 1) if n > 1 else 0.0
    need = (dens - epsilon / 2) * (s - 1)
    qualifying = []
    for S in pool:
        H, _ = _induced_relabel(G, S)
        if H.edge_count and min_degree(H) >= need:
            qualifying.append(S)
    skipped = []
    cache = {}
    while True:
        count = {e: 0 for e in G.edges()}
        for S in qualifying:
            Sset = set(S)
            for e in count:
                if e[0] in Sset and e[1] in Sset:
                    count[e] += 1
        missing = [e for e, c in count.items() if c == 0]
        if missing:
            raise SearchFailure(f"edge {missing[0]} lies in no qualifying subset",
                                {"qualifying": len(qualifying), "skipped": len(skipped)})
        Z = min(count.values())
        total = {}
        clamps = 0
        failed = None
        for S in qualifying:
            H, order = _induced_relabel(G, S)
            low = 1 - Fraction(1, H.edge_count)
            tg = {}
            for u, v in H.edges():
                t = Fraction(Z, count[(order[u], order[v])])
                if t < low:
                    t = low
                    clamps += 1
                tg[(u, v)] = t
            key = (H.adj, tuple(sorted(tg.items())))
            if key not in cache:
                try:
                    cache[key] = seeded_fixed(H, q, tg, epsilon, rng=random.Random(rng.getrandbits(32)))
                except Infeasible:
                    cache[key] = None
            phi = cache[key]
            if phi is None:
                failed = S
                break
            for c, v in _lift(phi, G, order).items():
                total[c] = total.get(c, Fraction(0)) + v
        if failed is None:
            break
        qualifying.remove(failed)
        skipped.append(failed)
    w = FractionalWeighting(G, q, {c: v / Z for c, v in total.items()},
                            {"subsets": len(pool), "qualifying": len(qualifying), "skipped": len(skipped),
                             "normalization": Z, "clamped_targets": clamps, "distinct_lps": len(cache)})
    rep = verify_fractional(G, w)
    w.notes["defect_before_repair"] = str(rep.worst_edge_defect)
    if rep.worst_edge_defect and repair:
        w = _repair(G, q, w)
        w.notes["defect_after_repair"] = str(verify_fractional(G, w).worst_edge_defect)
    return w


def _repair(G, q, w, steps: int = 6):
    """Scale down so no boundary exceeds 1, then fill the gap by one LP.

    The scale halves until the fill is feasible; scale 0 is a plain solve."""
    bnd = w.boundary()
    top = max(bnd.values())
    f = Fraction(1) / top if top > 1 else Fraction(1)
    for k in range(steps + 1):
        scale = f / 2 ** k if k < steps else Fraction(0)
        resid = {e: 1 - b * scale for e, b in bnd.items()}
        try:
            fill = solve_fractional(G, q, targets=resid)
        except Infeasible:
            continue
        out = {c: v * scale for c, v in w.weights.items() if scale}
        for c, v in fill.weights.items():
            out[c] = out.get(c, Fraction(0)) + v
        return FractionalWeighting(G, q, out, dict(w.notes, repair="lp", repair_scale=str(scale)))
    w.notes["repair"] = "failed"
    return w


def uniform_weighting(G: Graph, q: int, value) -> FractionalWeighting:
    idx = clique_index(G, q)
    v = Fraction(value)
    return FractionalWeighting(G, q, {c: v for c in range(len(idx))})
