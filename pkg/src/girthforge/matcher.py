"""Exact-cover search with configuration avoidance.

One engine serves both the treasury matcher and exact decompositions: rows
are clique ids, primary items (edge ids) must be covered exactly once,
secondary items at most once.  Column choice is minimum-remaining-values,
ties broken by a per-restart random permutation; row order prefers the
lower tier (design cliques before reserve cliques) and is otherwise random.

Configurations are avoided incrementally.  When a clique ``t`` is chosen we
look for every connected set S of already-chosen cliques containing ``t``
that a single further clique would complete into a forbidden configuration,
and mark those completing cliques dead.  For q <= 4 with no background sets
this forward check is complete; otherwise every candidate is also tested
directly before it is tried.
"""
from __future__ import annotations

import itertools
import json
import random
import sys
import time
from dataclasses import dataclass, field

from .errors import BudgetExhausted, InputError, ProvenInfeasible, SearchFailure
from .girth import Packing, connected_sets, girth_at_least, is_decomposition, packing_girth
from .graph import Graph, clique_index, graph_from_mask_edges, is_divisible


class ConfigTracker:
    """Incremental detector of configurations among chosen cliques.

    ``minimal=False``: forbid any set of i cliques (i_min <= i <= i_max) on
    at most i(q-2)+2 vertices.  ``minimal=True``: forbid only Erdős
    configurations (exactly that many vertices, no smaller configuration
    inside).  Each background set M acts as a pool of extra cliques that may
    take part in a configuration without being chosen.
    """

    def __init__(self, index, q, i_max, i_min=2, minimal=False, backgrounds=(frozenset(),),
                 check_candidates=None):
        self.index = index
        self.q = q
        self.i_max = i_max
        self.i_min = max(2, i_min)
        self.minimal = minimal
        self.masks = index.vertex_masks
        self.id_of = index.id_of
        self.edge_ids = index.graph.edge_ids()
        n = index.graph.n
        self.chosen_at = [[] for _ in range(n)]
        bgs = [frozenset(b) for b in backgrounds] or [frozenset()]
        self.backgrounds = bgs
        self.pools = []
        for M in bgs:
            at = [[] for _ in range(n)]
            for c in M:
                for v in index.cliques[c].vertices:
                    at[v].append(c)
            self.pools.append(at)
        self.has_bg = any(bgs)
        if check_candidates is None:
            check_candidates = self.has_bg or q >= 5 or minimal
        self.check_candidates = check_candidates
        self.blocked = None  # set by the engine: 0 means alive
        self._memo: dict = {}

    def add(self, t):
        for v in self.index.cliques[t].vertices:
            self.chosen_at[v].append(t)

    def remove(self, t):
        for v in self.index.cliques[t].vertices:
            self.chosen_at[v].remove(t)

    def _sets(self, root, at_bg, max_size):
        masks = self.masks
        chosen_at = self.chosen_at
        cap = self.i_max * (self.q - 2) + 2
        # chosen cliques are pairwise edge-disjoint already
        check_overlap = self.has_bg

        def nb(w):
            out = []
            m = masks[w]
            while m:
                low = m & -m
                m ^= low
                v = low.bit_length() - 1
                out.extend(chosen_at[v])
                out.extend(at_bg[v])
            return out

        def grow(sub, span, ext):
            yield sub, span
            if len(sub) >= max_size:
                return
            ext = list(ext)
            while ext:
                w = ext.pop()
                mw = masks[w]
                ns = span | mw
                if ns.bit_count() > cap:
                    continue
                if check_overlap and any((masks[s] & mw).bit_count() >= 2 for s in sub):
                    continue
                seen = set(ext)
                new = []
                for u in nb(w):
                    if masks[u] & span == 0 and u not in seen:
                        seen.add(u)
                        new.append(u)
                yield from grow(sub + [w], ns, ext + new)

        first = []
        seen = {root}
        for u in nb(root):
            if u not in seen:
                seen.add(u)
                first.append(u)
        yield from grow([root], masks[root], first)

    def _is_config(self, members, span_count):
        k = len(members)
        if k < self.i_min:
            return False
        budget = k * (self.q - 2) + 2
        if self.minimal:
            return span_count == budget and not self._has_smaller(frozenset(members))
        return span_count <= budget

    def _has_smaller(self, ids):
        hit = self._memo.get(ids)
        if hit is None:
            hit = False
            members = sorted(ids)
            q2 = self.q - 2
            for j in range(len(members) - 1, 2, -1):
                for sub in itertools.combinations(members, j):
                    span = 0
                    for c in sub:
                        span |= self.masks[c]
                    if span.bit_count() <= j * q2 + 2:
                        hit = True
                        break
                if hit:
                    break
            if len(self._memo) > 200000:
                self._memo.clear()
            self._memo[ids] = hit
        return hit

    def admissible(self, T) -> bool:
        """No forbidden configuration containing T among chosen + background."""
        for at in self.pools:
            for sub, span in self._sets(T, at, self.i_max):
                if len(sub) >= 2 and self._is_config(sub, span.bit_count()):
                    return False
        return True

    def kills(self, t) -> list:
        """Alive cliques that would complete a forbidden configuration with t."""
        blocked = self.blocked
        q = self.q
        q2 = q - 2
        masks = self.masks
        out = set()
        for at in self.pools:
            for sub, span in self._sets(t, at, self.i_max - 1):
                k = len(sub)
                if k < 2 and self.i_min > 2:
                    continue
                s = span.bit_count()
                need = s + q - (k + 1) * q2 - 2
                if need > q or need < 2:
                    continue
                for T in self._completions(span, need, sub):
                    if blocked[T] == 0 and T not in out:
                        members = sub + [T]
                        if self._is_config(members, (span | masks[T]).bit_count()):
                            out.add(T)
        return list(out)

    def _completions(self, span, need, sub):
        masks = self.masks
        verts = []
        m = span
        while m:
            low = m & -m
            m ^= low
            verts.append(low.bit_length() - 1)
        subset = set(sub)
        blocked = self.blocked
        # an alive clique already shares no edge with any chosen clique
        bg = self.has_bg
        res = []
        if need == self.q:
            id_of = self.id_of
            for combo in itertools.combinations(verts, self.q):
                c = id_of.get(combo)
                if c is None or blocked[c] or c in subset:
                    continue
                if not bg or all((masks[s] & masks[c]).bit_count() <= 1 for s in sub):
                    res.append(c)
            return res
        seen = set()
        by_edge = self.index.by_edge
        for a, b in itertools.combinations(verts, 2):
            e = self.edge_ids.get((a, b))
            if e is None:
                continue
            for c in by_edge[e]:
                if blocked[c] or c in seen or c in subset:
                    continue
                seen.add(c)
                if (masks[c] & span).bit_count() >= need and (
                    not bg or all((masks[s] & masks[c]).bit_count() <= 1 for s in sub)
                ):
                    res.append(c)
        return res


class _Budget(Exception):
    pass


class CoverEngine:
    """Dancing-links style exact cover over clique rows (array based)."""

    def __init__(self, index, rows, primary, secondary=(), tier=None, tracker=None, h_edges=None):
        self.index = index
        N = len(index)
        self.N = N
        self.row_items = index.edge_sets
        self.primary = sorted(set(primary))
        prim = set(self.primary)
        sec = set(secondary)
        allowed = prim | sec
        self.is_row = [False] * N
        for r in rows:
            if all(e in allowed for e in self.row_items[r]) and any(e in prim for e in self.row_items[r]):
                self.is_row[r] = True
        n_items = index.graph.edge_count
        self.item_rows = [[] for _ in range(n_items)]
        for r in range(N):
            if self.is_row[r]:
                for e in self.row_items[r]:
                    self.item_rows[e].append(r)
        self.is_primary = [False] * n_items
        for e in prim:
            self.is_primary[e] = True
        self.tier = tier or {}
        self.tracker = tracker
        self.h_by_row = None
        if h_edges is not None:
            h = [tuple(P) for P in h_edges if all(self.is_row[c] for c in P)]
            self.h_edges = h
            self.h_by_row = [[] for _ in range(N)]
            for i, P in enumerate(h):
                for c in P:
                    self.h_by_row[c].append(i)

    def _reset(self):
        N = self.N
        self.blocked = [0 if self.is_row[r] else 1 for r in range(N)]
        self.live = [len(rs) for rs in self.item_rows]
        self.covered = [False] * len(self.item_rows)
        self.chosen = []
        self.is_chosen = [False] * N
        if self.h_by_row is not None:
            self.h_cnt = [0] * len(self.h_edges)
        if self.tracker is not None:
            self.tracker.blocked = self.blocked
            for at in self.tracker.chosen_at:
                at.clear()

    def _block(self, r, log):
        if self.blocked[r] == 0:
            live = self.live
            for e in self.row_items[r]:
                live[e] -= 1
        self.blocked[r] += 1
        log.append(r)

    def _select(self, r):
        log = []
        blocked = self.blocked
        for e in self.row_items[r]:
            self.covered[e] = True
            for r2 in self.item_rows[e]:
                self._block(r2, log)
        self.chosen.append(r)
        self.is_chosen[r] = True
        if self.h_by_row is not None:
            for i in self.h_by_row[r]:
                self.h_cnt[i] += 1
                P = self.h_edges[i]
                if self.h_cnt[i] == len(P) - 1:
                    for c in P:
                        if not self.is_chosen[c]:
                            if blocked[c] == 0:
                                self._block(c, log)
                            break
        if self.tracker is not None:
            self.tracker.add(r)
            for T in self.tracker.kills(r):
                self._block(T, log)
        return log

    def _unselect(self, r, log):
        blocked = self.blocked
        live = self.live
        for r2 in reversed(log):
            blocked[r2] -= 1
            if blocked[r2] == 0:
                for e in self.row_items[r2]:
                    live[e] += 1
        if self.tracker is not None:
            self.tracker.remove(r)
        if self.h_by_row is not None:
            for i in self.h_by_row[r]:
                self.h_cnt[i] -= 1
        self.chosen.pop()
        self.is_chosen[r] = False
        for e in self.row_items[r]:
            self.covered[e] = False

    def run(self, rng: random.Random, node_limit=None, deadline=None):
        """Returns ("found", rows) | ("exhausted", None) | ("limit", None)."""
        self._reset()
        order = list(self.primary)
        rng.shuffle(order)
        prio = {r: rng.random() for r in range(self.N) if self.is_row[r]}
        tier = self.tier
        key = lambda r: (tier.get(r, 0), prio[r])
        self.nodes = 0
        check = self.tracker is not None and self.tracker.check_candidates
        limit = node_limit if node_limit is not None else float("inf")

        def search():
            self.nodes += 1
            if self.nodes > limit:
                raise _Budget()
            if deadline is not None and self.nodes % 64 == 0 and time.monotonic() > deadline:
                raise _Budget()
            best = -1
            bc = None
            live = self.live
            covered = self.covered
            for e in order:
                if not covered[e]:
                    c = live[e]
                    if bc is None or c < bc:
                        best, bc = e, c
                        if c <= 1:
                            break
            if best < 0:
                return True
            if bc == 0:
                return False
            cands = [r for r in self.item_rows[best] if self.blocked[r] == 0]
            cands.sort(key=key)
            for r in cands:
                if self.blocked[r]:
                    continue
                if check and not self.tracker.admissible(r):
                    continue
                log = self._select(r)
                if search():
                    return True
                self._unselect(r, log)
            return False

        old = sys.getrecursionlimit()
        sys.setrecursionlimit(max(old, 10 * len(self.primary) + 1000))
        try:
            ok = search()
        except _Budget:
            return "limit", None
        finally:
            sys.setrecursionlimit(old)
        return ("found", list(self.chosen)) if ok else ("exhausted", None)


def _restart_loop(engine, rng, time_budget, first_limit=2000, growth=2.0, max_restarts=None,
                  node_limit=None):
    """Randomized restarts with growing node limits.  A run that finishes
    under its limit is conclusive."""
    start = time.monotonic()
    deadline = None if time_budget is None else start + time_budget
    limit = first_limit
    attempts = 0
    total_nodes = 0
    while True:
        attempts += 1
        cap = limit if node_limit is None else node_limit
        status, sol = engine.run(random.Random(rng.getrandbits(64)), cap, deadline)
        total_nodes += engine.nodes
        stats = {"restarts": attempts, "nodes": total_nodes, "seconds": round(time.monotonic() - start, 3)}
        if status != "limit":
            return status, sol, stats
        if deadline is not None and time.monotonic() > deadline:
            return "budget", None, stats
        if max_restarts is not None and attempts >= max_restarts:
            return "budget", None, stats
        limit = int(limit * growth)


def exact_decomposition(G: Graph, q: int = 3, girth_min: int = 2, time_budget: float | None = 60.0,
                        rng=None, seed: int = 0) -> Packing:
    """K_q-decomposition of G with packing girth >= girth_min.

    Raises ProvenInfeasible when the search space is exhausted and
    BudgetExhausted when time runs out first."""
    if not is_divisible(G, q):
        raise InputError("host graph is not K_q-divisible")
    rng = rng or random.Random(seed)
    index = clique_index(G, q)
    tracker = None
    if girth_min - 1 >= 3:
        tracker = ConfigTracker(index, q, i_max=girth_min - 1, i_min=2, minimal=False)
    engine = CoverEngine(index, range(len(index)), range(G.edge_count), (), None, tracker)
    status, sol, stats = _restart_loop(engine, rng, time_budget, first_limit=3000, growth=1.15)
    if status == "exhausted":
        raise ProvenInfeasible(f"no K_{q}-decomposition with girth >= {girth_min}", stats)
    if status != "found":
        raise BudgetExhausted("time budget exhausted", stats)
    P = Packing.from_ids(index, sol)
    if not is_decomposition(G, P):
        raise SearchFailure("internal error: search returned a non-decomposition", stats)
    if girth_min > 2 and not girth_at_least(packing_girth(P, girth_min - 1), girth_min):
        raise SearchFailure("internal error: girth check failed", stats)
    return P


# treasury matching

@dataclass
class Matching:
    design: tuple
    reserve: tuple
    index: object = field(repr=False, default=None)
    stats: dict = field(default_factory=dict)

    @property
    def chosen(self) -> tuple:
        return self.design + self.reserve

    def covered(self) -> int:
        m = 0
        for c in self.chosen:
            for e in self.index.edge_sets[c]:
                m |= 1 << e
        return m

    def to_json(self) -> dict:
        v = self.index.vertices
        return {"design": [list(v(c)) for c in self.design], "reserve": [list(v(c)) for c in self.reserve]}

    @classmethod
    def from_json(cls, data, index) -> "Matching":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            d = tuple(index.lookup(b) for b in data["design"])
            r = tuple(index.lookup(b) for b in data["reserve"])
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed matching JSON: {exc}") from None
        return cls(d, r, index)


def _treasury_engine(T, check_candidates=None):
    H = T.H
    rows = [c for c in list(T.G1.labels) + list(T.G2.labels) if c not in H.deleted]
    tier = {c: 1 for c in T.G2.labels}
    tracker = None
    h_edges = None
    if H.lazy:
        tracker = ConfigTracker(T.index, T.q, H.i_max, H.i_min, minimal=True, backgrounds=H.backgrounds,
                                check_candidates=check_candidates)
    else:
        h_edges = H.edges
    return CoverEngine(T.index, rows, T.A, T.B, tier, tracker, h_edges)


def find_perfect_matching(T, rng=None, restarts: int = 50, backtrack_budget: int = 20000,
                          time_budget: float | None = None, seed: int = 0) -> Matching:
    """H-avoiding matching covering every non-reserve edge exactly once."""
    rng = rng or random.Random(seed)
    engine = _treasury_engine(T)
    uncoverable = [e for e in T.A if not engine.item_rows[e]]
    if uncoverable:
        raise SearchFailure("some non-reserve edges lie in no usable clique",
                            {"uncoverable": len(uncoverable), "example_edge": T.index.graph.edges()[min(uncoverable)]})
    status, sol, stats = _restart_loop(engine, rng, time_budget, first_limit=backtrack_budget, growth=1.0,
                                       max_restarts=restarts)
    if status == "exhausted":
        raise ProvenInfeasible("treasury has no perfect matching", stats)
    if status != "found":
        raise BudgetExhausted("matching budgets exhausted", stats)
    g2 = set(T.G2.labels)
    M = Matching(tuple(sorted(c for c in sol if c not in g2)), tuple(sorted(c for c in sol if c in g2)),
                 T.index, stats)
    problem = verify_matching(T, M)
    if problem:
        raise SearchFailure(f"internal error: matching failed re-verification: {problem}", stats)
    return M


def verify_matching(T, M: Matching):
    """Independent re-check; returns None when M is a perfect matching of T,
    else a description of the first defect."""
    H = T.H
    g1, g2 = set(T.G1.labels), set(T.G2.labels)
    for c in M.design:
        if c not in g1 or c in H.deleted:
            return f"clique {T.index.vertices(c)} is not a design hyperedge"
    for c in M.reserve:
        if c not in g2 or c in H.deleted:
            return f"clique {T.index.vertices(c)} is not a reserve hyperedge"
    seen = {}
    for c in M.chosen:
        for e in T.index.edge_sets[c]:
            if e in seen:
                return f"edge {T.index.graph.edges()[e]} covered twice"
            seen[e] = c
    for e in T.A:
        if e not in seen:
            return f"edge {T.index.graph.edges()[e]} not covered"
    chosen = set(M.chosen)
    if not H.lazy:
        for P in H.edges:
            if P <= chosen:
                return f"configuration {sorted(P)} spanned"
        return None
    bad = _lazy_violation(T.index, T.q, chosen, H)
    return bad


def _erdos_exact(index, q, ids) -> bool:
    k = len(ids)
    span = 0
    for c in ids:
        span |= index.vertex_masks[c]
    if span.bit_count() != k * (q - 2) + 2:
        return False
    for j in range(k - 1, 2, -1):
        for sub in itertools.combinations(sorted(ids), j):
            s = 0
            for c in sub:
                s |= index.vertex_masks[c]
            if s.bit_count() <= j * (q - 2) + 2:
                return False
    return True


def _lazy_violation(index, q, chosen, H):
    """Scan chosen + each background for a forbidden configuration with at
    least one chosen member (girth-module enumeration, not the tracker)."""
    for M in H.backgrounds:
        pool = sorted(set(chosen) | set(M))
        masks = [index.vertex_masks[c] for c in pool]
        by_vertex = {}
        for i, c in enumerate(pool):
            for v in index.cliques[c].vertices:
                by_vertex.setdefault(v, []).append(i)
        roots = [i for i, c in enumerate(pool) if c in chosen]
        for sub, span in connected_sets(masks, by_vertex, H.i_max, H.i_max * (q - 2) + 2, edge_disjoint=True,
                                        roots=roots, anchored=True):
            if len(sub) < max(H.i_min, 2):
                continue
            ids = [pool[i] for i in sub]
            if _erdos_exact(index, q, ids):
                return f"configuration {sorted(ids)} with background"
    return None


def lazy_deleted(index, q, family, i_min, i_max, already=frozenset()) -> frozenset:
    """Cliques F completing a minimal configuration with some M alone."""
    out = set()
    for M in family:
        if not M:
            continue
        tracker = ConfigTracker(index, q, i_max, i_min, minimal=True, backgrounds=(M,))
        near = 0
        for c in M:
            near |= index.vertex_masks[c]
        for F in range(len(index)):
            if F in M or F in out or F in already:
                continue
            if index.vertex_masks[F] & near == 0:
                continue
            if not tracker.admissible(F):
                out.add(F)
    return frozenset(out)


def lazy_edges_through(T, F) -> set:
    """Projected configuration edges containing clique F (lazy treasuries)."""
    return _lazy_edges_through(T, F)[0]


def _lazy_edges_through(T, F, deadline=None):
    """(edges, truncated); stops early once ``deadline`` (monotonic) passes."""
    H = T.H
    index = T.index
    q = T.q
    out = set()
    if F in H.deleted:
        return out, False
    masks = index.vertex_masks
    by_vertex = {v: lst for v, lst in enumerate(index.by_vertex)}
    steps = 0
    for sub, span in connected_sets(masks, by_vertex, H.i_max, H.i_max * (q - 2) + 2, edge_disjoint=True,
                                    roots=[F], anchored=True):
        steps += 1
        if deadline is not None and steps % 1024 == 0 and time.monotonic() > deadline:
            return out, True
        if len(sub) < H.i_min or not _erdos_exact(index, q, sub):
            continue
        Z = frozenset(sub)
        for M in H.backgrounds:
            P = Z - M
            if len(P) >= 2 and F in P and not (P & H.deleted):
                out.add(P)
    return out, False


def lazy_admissible(T, S, t) -> bool:
    """Would adding clique t to the chosen set S keep it H-avoiding?"""
    H = T.H
    if t in H.deleted:
        return False
    tracker = ConfigTracker(T.index, T.q, H.i_max, H.i_min, minimal=True, backgrounds=H.backgrounds)
    for c in S:
        tracker.add(c)
    return tracker.admissible(t)


def materialized_admissible(T, S, t) -> bool:
    H = T.H
    if t in H.deleted:
        return False
    pool = set(S) | {t}
    return not any(t in P and P <= pool for P in H.edges)


def assemble_steiner(A, matching: Matching, G: Graph, X: Graph, g: int | None = None) -> Packing:
    """Matching cliques plus the absorber's decomposition of the leftover."""
    index = matching.index
    covered = matching.covered()
    X = X.resized(G.n)
    x_edges = set(X.edges())
    a_edges = set(A.A.resized(G.n).edges())
    all_edges = G.edges()
    for i, e in enumerate(all_edges):
        if e in x_edges or e in a_edges:
            continue
        if not covered >> i & 1:
            raise SearchFailure(f"matching leaves edge {e} uncovered")
    left = [e for i, e in enumerate(all_edges) if e in x_edges and not covered >> i & 1]
    L = graph_from_mask_edges(G.n, left)
    if not is_divisible(L, A.q):
        raise SearchFailure(f"leftover {sorted(left)} is not divisible")
    blocks = [index.vertices(c) for c in matching.chosen] + list(A.decompose(L).blocks)
    P = Packing(blocks, A.q)
    if not is_decomposition(G, P):
        raise SearchFailure("assembled packing does not decompose the host")
    if g is not None and not girth_at_least(packing_girth(P, g - 1), g):
        raise SearchFailure(f"assembled decomposition has girth below {g}")
    return P
