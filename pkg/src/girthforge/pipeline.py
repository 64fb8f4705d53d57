"""Omni-absorbers, girth boosting and the end-to-end decomposition pipeline.

An omni-absorber for X is a graph A, edge-disjoint from X, with a clique
family and, for every K_q-divisible L inside X, a decomposition of A + L
drawn from that family.  The pipeline reserves X, absorbs it, boosts girth
with spheres, projects the treasury by the absorber's decompositions,
boosts regularity, finds a configuration-avoiding matching and assembles
the final decomposition.
"""
from __future__ import annotations

import itertools
import os
import random
import time
from dataclasses import dataclass, field

from .boosting import restricted_boost, sample_reserves
from .embedding import SupergraphSystem, _order, embed_system, place_gadget
from .errors import GirthforgeError, Infeasible, InputError, ProvenInfeasible, SearchFailure
from .fractional import solve_fractional
from .gadgets import IdAllocator, find_absorber, g_sphere
from .girth import AtLeast, Packing, connected_sets, girth_at_least, girth_to_json, is_decomposition, packing_girth
from .graph import Config, Graph, clique_index, empty_graph, is_divisible, max_degree
from .matcher import assemble_steiner, exact_decomposition, find_perfect_matching
from .treasury import Treasury, check_regular, divisible_subgraphs, omniabsorber_projection


def _key(L: Graph) -> frozenset:
    return frozenset(L.edges())


def _edges_of_blocks(blocks) -> list:
    out = []
    for b in blocks:
        out.extend(itertools.combinations(sorted(b), 2))
    return out


@dataclass
class OmniAbsorber:
    q: int
    n: int
    X: Graph
    A: Graph
    family: tuple  # sorted vertex tuples
    decompositions: dict  # frozenset(L edges) -> Packing of A + L
    refinement: int
    booster_map: dict | None = None  # family clique -> RootedBooster placed in the host
    parts: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    def divisible_subsets(self) -> list:
        return divisible_subgraphs(self.X, self.q)

    def decompose(self, L: Graph) -> Packing:
        try:
            return self.decompositions[_key(L)]
        except KeyError:
            raise InputError("L is not a divisible subgraph of X") from None

    def verify(self) -> list[str]:
        """Exhaustive check over every divisible L; returns the problems."""
        problems = []
        fam = set(self.family)
        for L in self.divisible_subsets():
            P = self.decompositions.get(_key(L))
            if P is None:
                problems.append(f"no decomposition for L={L.edges()}")
                continue
            if not set(P.blocks) <= fam:
                problems.append(f"decomposition for L={L.edges()} leaves the family")
            target = self.A.resized(self.n).union(L.resized(self.n))
            if (target.edge_count or len(P)) and not is_decomposition(target, P):
                problems.append(f"decomposition for L={L.edges()} does not decompose A + L")
        if set(self.A.edges()) & set(self.X.edges()):
            problems.append("A meets X")
        if refinement_of(self.family) != self.refinement:
            problems.append("refinement statistic is wrong")
        return problems

    def summary(self) -> dict:
        return {"A_edges": self.A.edge_count, "X_edges": self.X.edge_count, "family": len(self.family),
                "divisible_subgraphs": len(self.decompositions), "refinement": self.refinement,
                "boosted": self.booster_map is not None, **self.stats}

    def to_json(self) -> dict:
        return {"q": self.q, "n": self.n, "A": [list(e) for e in self.A.edges()],
                "X": [list(e) for e in self.X.edges()], "family": [list(b) for b in self.family],
                "decompositions": [{"L": [list(e) for e in sorted(k)], "blocks": [list(b) for b in P]}
                                   for k, P in sorted(self.decompositions.items(), key=lambda kv: sorted(kv[0]))],
                "refinement": self.refinement}


def refinement_of(family) -> int:
    cnt = {}
    for b in family:
        for e in itertools.combinations(sorted(b), 2):
            cnt[e] = cnt.get(e, 0) + 1
    return max(cnt.values(), default=0)


def build_private_omniabsorber(G: Graph, X: Graph, q: int = 3, rng=None, seed: int = 0, C_prime: float = 50,
                               max_x_edges: int = 20, absorber_budget: float = 60.0) -> OmniAbsorber:
    """One private absorber per non-empty divisible L inside X, embedded
    edge-disjointly into G minus X."""
    rng = rng or random.Random(seed)
    X = X.resized(G.n)
    if X.edge_count > max_x_edges:
        raise InputError(f"X has {X.edge_count} > {max_x_edges} edges")
    if not X.is_subgraph_of(G):
        raise InputError("X must be a subgraph of G")
    Ls = [L for L in divisible_subgraphs(X, q) if L.edge_count]
    if not Ls:
        empty = empty_graph(G.n)
        return OmniAbsorber(q, G.n, X, empty, (), {frozenset(): Packing([], q)}, 0, stats={"absorbers": 0})
    fresh = IdAllocator(G.n)
    absorbers = []
    for L in Ls:
        try:
            absorbers.append(find_absorber(L, q, fresh, rng=rng, time_budget=absorber_budget))
        except SearchFailure as exc:
            raise type(exc)(f"no absorber for L={L.edges()}: {exc}", exc.stats) from None
    C = max(max(len(a.gadget.vertices), len(a.gadget.edges)) for a in absorbers)
    system = SupergraphSystem(X, [(a.L, a.gadget) for a in absorbers], C)
    try:
        emb = embed_system(system, G, C_prime, rng=rng)
    except SearchFailure as exc:
        culprit = Ls[exc.stats.get("member", 0)].edges()
        raise SearchFailure(f"could not embed the absorber for L={culprit}", exc.stats) from None
    placed = [a.relabel(emb.vertex_map) for a in absorbers]
    A = emb.image
    decomps = {}
    offs = [list(p.without_L) for p in placed]
    decomps[frozenset()] = Packing([b for o in offs for b in o], q)
    for i, L in enumerate(Ls):
        blocks = list(placed[i].with_L) + [b for j, o in enumerate(offs) if j != i for b in o]
        decomps[_key(L)] = Packing(blocks, q)
    family = tuple(sorted({b for P in decomps.values() for b in P}))
    oa = OmniAbsorber(q, G.n, X, A, family, decomps, refinement_of(family), parts=placed,
                      stats={"absorbers": len(placed), "sources": [p.source for p in placed],
                             "embedding": emb.stats})
    problems = oa.verify()
    if problems:
        raise SearchFailure("omni-absorber failed verification: " + problems[0])
    return oa


def sphere_half_girth(g: int) -> int:
    """Smallest sphere size whose rooted girth 2*h reaches g."""
    return max(2, -(-g // 2))


def boost_omniabsorber(A: OmniAbsorber, G: Graph, g: int, rng=None, seed: int = 0, retries: int = 200,
                       selection_budget: int = 4096) -> OmniAbsorber:
    """Attach a sphere to every family clique so that all selections have girth >= g."""
    rng = rng or random.Random(seed)
    h = sphere_half_girth(g)
    n = G.n
    q = A.q
    if q != 3:
        raise InputError("sphere boosting is implemented for triangles only")
    taken = A.A.resized(n).union(A.X.resized(n))
    free = [G.adj[v] & ~taken.adj[v] for v in range(n)]
    used_adj = [0] * n
    load = [0] * n
    fresh = IdAllocator(n)
    boosters = {}
    needed = len(A.family) * (6 * h - 3)
    available = G.edge_count - taken.edge_count
    pool = []  # (block, owner, side)
    for F in A.family:
        sph = g_sphere(F, h, fresh)
        order = _order(sph.gadget)
        ok = False
        reasons = {"A": 0, "B": 0, "girth": 0}
        for _ in range(retries):
            placed, why = place_gadget(sph.gadget, free, used_adj, load, n * n, rng, 1, n, order)
            if placed is None:
                reasons[why] += 1
                continue
            B = sph.relabel(placed)
            if _creates_short_configuration(pool, B, F, A.family, g):
                reasons["girth"] += 1
                continue
            ok = True
            break
        if not ok:
            raise SearchFailure(f"no admissible sphere placement for family clique {F}",
                                {"clique": list(F), "placed": len(boosters), "family": len(A.family),
                                 "rejections": reasons, "edges_needed": needed, "edges_available": available,
                                 "sphere_half_girth": h})
        for u, v in B.gadget.edges:
            used_adj[u] |= 1 << v
            used_adj[v] |= 1 << u
        boosters[F] = B
        pool += [(b, F, "on") for b in B.on] + [(b, F, "off") for b in B.off]
    bodies = Graph(n, tuple(used_adj))
    newA = A.A.resized(n).union(bodies)
    decomps = {}
    for k, P in A.decompositions.items():
        chosen = set(P.blocks)
        blocks = []
        for F, B in boosters.items():
            blocks.extend(B.on if F in chosen else B.off)
        decomps[k] = Packing(blocks, q)
    family = tuple(sorted({b for B in boosters.values() for b in list(B.on) + list(B.off)}))
    out = OmniAbsorber(q, n, A.X, newA, family, decomps, refinement_of(family), boosters, A.parts,
                       dict(A.stats, sphere_half_girth=h, base_family=len(A.family)))
    problems = out.verify() + booster_disjointness(out)
    if problems:
        raise SearchFailure("boosted omni-absorber failed verification: " + problems[0])
    return out


def booster_disjointness(A: OmniAbsorber) -> list[str]:
    """Bodies pairwise edge-disjoint and disjoint from the base absorber and X."""
    seen = {}
    problems = []
    base = set(A.X.edges())
    for p in A.parts:
        base |= set(p.gadget.edges)
    for F, B in (A.booster_map or {}).items():
        for e in B.gadget.edges:
            if e in seen:
                problems.append(f"bodies of {seen[e]} and {F} share {e}")
            if e in base:
                problems.append(f"body of {F} meets the absorber or X at {e}")
            seen[e] = F
    return problems


def _compatible(members, pool_info, family_set):
    """Members (owner, side) can appear together in one selection."""
    side = {}
    on_owners = []
    for owner, s in members:
        if side.setdefault(owner, s) != s:
            return False
        if s == "on":
            on_owners.append(owner)
    on_owners = sorted(set(on_owners))
    for F1, F2 in itertools.combinations(on_owners, 2):
        if len(set(F1) & set(F2)) >= 2:
            return False
    return True


def _short_configurations(entries, g, q=3, roots=None, limit=1):
    """Compatible configurations of < g cliques among (block, owner, side)."""
    if g <= 2:
        return []
    blocks = [e[0] for e in entries]
    masks = [sum(1 << v for v in b) for b in blocks]
    by_vertex = {}
    for i, b in enumerate(blocks):
        for v in b:
            by_vertex.setdefault(v, []).append(i)
    out = []
    i_max = g - 1
    for sub, span in connected_sets(masks, by_vertex, i_max, i_max * (q - 2) + 2, edge_disjoint=True,
                                    roots=roots, anchored=roots is not None):
        k = len(sub)
        if k < 2 or span.bit_count() > k * (q - 2) + 2:
            continue
        if _compatible([(entries[i][1], entries[i][2]) for i in sub], None, None):
            out.append([entries[i] for i in sub])
            if len(out) >= limit:
                break
    return out


def _creates_short_configuration(pool, B, F, family, g):
    new = [(b, F, "on") for b in B.on] + [(b, F, "off") for b in B.off]
    entries = pool + new
    roots = list(range(len(pool), len(entries)))
    return bool(_short_configurations(entries, g, roots=roots))


def collective_girth(A: OmniAbsorber, g: int, selection_budget: int = 4096) -> dict:
    """Girth of every on/off selection (on-set a matching of family cliques).

    Exhaustive over selections when there are at most ``selection_budget``,
    otherwise a search for compatible short configurations (equivalent)."""
    q = A.q
    res = {"g": g, "per_L": {}}
    ok = True
    for k, P in A.decompositions.items():
        gv = packing_girth(P, g - 1) if len(P) else AtLeast(g)
        res["per_L"][len(k)] = girth_to_json(gv)
        ok &= girth_at_least(gv, g)
    if A.booster_map is None:
        res["pass"] = ok
        res["mode"] = "decompositions only"
        return res
    base = sorted(A.booster_map)
    matchings = []
    count_est = 2 ** len(base)
    if count_est <= selection_budget * 4:
        for r in range(len(base) + 1):
            for S in itertools.combinations(base, r):
                if all(len(set(a) & set(b)) < 2 for a, b in itertools.combinations(S, 2)):
                    matchings.append(S)
                    if len(matchings) > selection_budget:
                        break
            if len(matchings) > selection_budget:
                break
    if matchings and len(matchings) <= selection_budget:
        res["mode"] = "exhaustive"
        res["selections"] = len(matchings)
        worst = None
        for S in matchings:
            Sset = set(S)
            blocks = []
            for F, B in A.booster_map.items():
                blocks.extend(B.on if F in Sset else B.off)
            gv = packing_girth(Packing(blocks, q), g - 1)
            if not girth_at_least(gv, g):
                ok = False
                worst = (S, gv)
                break
        res["violation"] = None if worst is None else {"on": [list(F) for F in worst[0]], "girth": worst[1]}
    else:
        res["mode"] = "configuration search"
        entries = []
        for F, B in A.booster_map.items():
            entries += [(b, F, "on") for b in B.on] + [(b, F, "off") for b in B.off]
        bad = _short_configurations(entries, g)
        if bad:
            ok = False
            res["violation"] = [[list(b), list(F), s] for b, F, s in bad[0]]
        else:
            res["violation"] = None
    res["pass"] = ok
    return res


# pipeline

@dataclass
class PipelineResult:
    packing: Packing
    report: dict
    route: str


class PipelineError(SearchFailure):
    def __init__(self, stage, cause, report):
        super().__init__(f"stage {stage} failed: {cause}", getattr(cause, "stats", {}))
        self.stage = stage
        self.cause = cause
        self.report = report


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("GIRTHFORGE_THREADS", "1")))
    except ValueError:
        return 1


def run_pipeline(G: Graph, g: int, cfg: Config | None = None, rng=None, audit: bool = True) -> PipelineResult:
    """Reserve, absorb, boost, project, regularize, match, assemble."""
    cfg = cfg or Config(g=g)
    q = cfg.q
    rng = rng or random.Random(cfg.rng_seed)
    start = time.monotonic()
    deadline = start + cfg.budget_s
    report = {"input": {"n": G.n, "edges": G.edge_count, "q": q, "g": g, "seed": cfg.rng_seed, "p": cfg.p},
              "threads": _threads(), "stages": []}

    def stage(name, fn):
        t = time.monotonic()
        entry = {"stage": name}
        report["stages"].append(entry)
        try:
            out, info = fn()
        except GirthforgeError as exc:
            entry.update({"status": "failed", "error": str(exc), "error_type": type(exc).__name__,
                          "details": getattr(exc, "stats", {}), "seconds": round(time.monotonic() - t, 3)})
            raise PipelineError(name, exc, report) from exc
        entry.update({"status": "ok", "seconds": round(time.monotonic() - t, 3), **(info or {})})
        return out

    def precheck():
        if not is_divisible(G, q):
            raise InputError("host is not K_q-divisible")
        try:
            w = solve_fractional(G, q)
        except Infeasible as exc:
            raise ProvenInfeasible("no fractional decomposition, so no decomposition",
                                   {"certificate_sum": str(sum(exc.certificate.values())),
                                    "certificate_size": len(exc.certificate)}) from None
        return None, {"fractional": "feasible", "support": len(w.support())}

    stage("precheck", precheck)

    def reserves():
        if cfg.p <= 0:
            return empty_graph(G.n), {"skipped": "p = 0"}
        R = sample_reserves(G, q, cfg.p, rng, cfg.max_retries, cfg.reserve_threshold)
        return R.X, {"X_edges": R.X.edge_count, "max_degree": max_degree(R.X),
                     "min_extensions": R.per_edge_min_extensions, "attempts": R.attempts}

    X = stage("reserves", reserves)

    def absorb():
        oa = build_private_omniabsorber(G, X, q, rng, C_prime=cfg.C_prime)
        return oa, oa.summary()

    oa = stage("omniabsorber", absorb)

    def boost():
        if not oa.family:
            return oa, {"skipped": "empty family"}
        boosted = boost_omniabsorber(oa, G, g, rng)
        cg = collective_girth(boosted, g)
        if not cg["pass"]:
            raise SearchFailure("collective girth check failed", cg)
        return boosted, {"collective_girth": cg, **boosted.summary()}

    oa = stage("girth_boost", boost)

    def project():
        T = omniabsorber_projection(oa, G, X, g)
        info = {"treasury": T.summary()}
        if audit:
            D = max(T.G1.degree_map().values(), default=0)
            info["regularity"] = _audit_summary(check_regular(T, max(D, 1), cfg.sigma, cfg.beta, cfg.alpha,
                                                                lazy_sample=cfg.extras.get("audit_sample", 6),
                                                                lazy_time=cfg.extras.get("audit_seconds", 10.0)))
        return T, info

    T = stage("projection", project)

    def regularize():
        J = G.difference(oa.A.resized(G.n)).difference(X)
        g1 = set(T.G1.labels)
        Jidx = clique_index(J, q)
        idx = T.index
        F_orb = [c for c in range(len(Jidx)) if idx.id_of[Jidx.vertices(c)] not in g1]
        fam = restricted_boost(J, q, F_orb, rng=rng, alpha=1.0, census=J.n <= 30)
        keep = [idx.id_of[Jidx.vertices(c)] for c in fam.cliques]
        return keep, {"family": len(keep), "forbidden": len(F_orb), "target_d": fam.target_d,
                      "max_deviation": fam.max_deviation, **{k: v for k, v in fam.stats.items()}}

    keep = stage("regularity_boost", regularize)

    def match():
        routes = [("boosted", T.G1.restricted(keep)), ("full-treasury", T.G1)]
        errors = []
        for name, G1 in routes:
            sub = Treasury(T.index, T.q, T.g, G1, T.G2, T.H, T.notes)
            left = max(1.0, deadline - time.monotonic())
            try:
                share = 0.25 if name == "boosted" else 0.6
                M = find_perfect_matching(sub, rng, restarts=cfg.max_retries, backtrack_budget=3000,
                                          time_budget=min(left * share, 120.0))
                return (name, M), {"route": name, "chosen": len(M.chosen), "reserve": len(M.reserve),
                                   "search": M.stats, "attempts": errors}
            except SearchFailure as exc:
                errors.append({"route": name, "error": type(exc).__name__, "stats": exc.stats})
        return (None, None), {"route": None, "attempts": errors}

    route, M = stage("matching", match)

    if M is not None:
        def assemble():
            P = assemble_steiner(oa, M, G, X, None)
            return P, {"blocks": len(P)}

        P = stage("assemble", assemble)
        route_name = "pipeline:" + route
    else:
        def fallback():
            last = None
            for gm in (g + 1, g):
                left = max(1.0, deadline - time.monotonic())
                try:
                    P = exact_decomposition(G, q, gm, time_budget=left, rng=rng)
                    return P, {"girth_min": gm}
                except ProvenInfeasible as exc:
                    last = exc
            raise last

        P = stage("fallback", fallback)
        route_name = "fallback"

    def verify():
        if not is_decomposition(G, P):
            raise SearchFailure("output is not a decomposition")
        gv = packing_girth(P, g + 1)
        if not girth_at_least(gv, g):
            raise SearchFailure(f"output girth {gv} is below {g}")
        return None, {"decomposition": True, "girth": girth_to_json(gv)}

    stage("verify", verify)
    report["route"] = route_name
    report["seconds"] = round(time.monotonic() - start, 3)
    return PipelineResult(P, report, route_name)


def _audit_summary(rep: dict) -> dict:
    out = {"pass": rep["pass"]}
    for k in ("RT1", "RT2", "RT3"):
        out[k] = {kk: v for kk, v in rep[k].items() if not kk.endswith("witness")}
    out["RT4"] = {"pass": rep["RT4"]["pass"], "exact": rep["RT4"]["exact"]}
    return out
