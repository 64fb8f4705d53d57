"""Rooted gadgets: anti-edges, fake edges, spheres, boosters and absorbers.

Gadgets live in the vertex id space of the host they will be embedded in.
Internal vertices get fresh ids from an :class:`IdAllocator`, so many
gadgets can be composed without clashes.
"""
from __future__ import annotations

import itertools
import json
import random
import time
from dataclasses import dataclass

from .errors import BudgetExhausted, GirthforgeError, InputError, ProvenInfeasible, SearchFailure
from .girth import AtLeast, Packing, is_decomposition, packing_girth
from .graph import Graph, graph_from_mask_edges, is_divisible
from .matcher import exact_decomposition

KINDS = ("AntiEdge", "FakeEdge", "Sphere", "Absorber", "Booster")


class IdAllocator:
    """Monotone source of fresh vertex ids; ids are never reused."""

    def __init__(self, start: int = 0):
        self.next = start

    def take(self, k: int = 1) -> list[int]:
        out = list(range(self.next, self.next + k))
        self.next += k
        return out

    def one(self) -> int:
        return self.take(1)[0]


def _pair(u, v):
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class RootedGadget:
    roots: tuple
    internal: tuple
    edges: frozenset
    kind: str = "Booster"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown gadget kind {self.kind}")
        if set(self.roots) & set(self.internal):
            raise InputError("root and internal vertices overlap")
        verts = set(self.roots) | set(self.internal)
        for u, v in self.edges:
            if u == v or u not in verts or v not in verts:
                raise InputError(f"bad gadget edge {(u, v)}")
        if self.kind != "Absorber":
            roots = set(self.roots)
            for u, v in self.edges:
                if u in roots and v in roots:
                    raise InputError(f"edge {(u, v)} lies inside the root set")

    @property
    def vertices(self) -> tuple:
        return tuple(sorted(set(self.roots) | set(self.internal)))

    def edge_count(self) -> int:
        return len(self.edges)

    def degree(self, v) -> int:
        return sum(1 for e in self.edges if v in e)

    def to_graph(self, n: int | None = None, extra=()) -> Graph:
        top = max(self.vertices, default=-1) + 1
        pairs = list(self.edges) + [_pair(*e) for e in extra]
        top = max([top] + [max(e) + 1 for e in pairs])
        return graph_from_mask_edges(n if n is not None else top, pairs)

    def relabel(self, mapping: dict) -> "RootedGadget":
        m = lambda v: mapping.get(v, v)
        return RootedGadget(tuple(m(v) for v in self.roots), tuple(m(v) for v in self.internal),
                            frozenset(_pair(m(u), m(v)) for u, v in self.edges), self.kind)

    def to_json(self) -> dict:
        return {"kind": self.kind, "roots": list(self.roots), "internal": list(self.internal),
                "internal_count": len(self.internal), "edges": [list(e) for e in sorted(self.edges)]}

    @classmethod
    def from_json(cls, data) -> "RootedGadget":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            return cls(tuple(data["roots"]), tuple(data["internal"]),
                       frozenset(_pair(u, v) for u, v in data["edges"]), data["kind"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed gadget JSON: {exc}") from None


def merge_gadgets(gadgets, kind="Booster", roots=None) -> RootedGadget:
    """Edge-disjoint union; internal ids must already be distinct."""
    edges, internal, root_set = set(), [], []
    for W in gadgets:
        if edges & W.edges:
            raise InputError("gadgets share an edge")
        edges |= W.edges
        internal.extend(W.internal)
        root_set.extend(W.roots)
    if roots is None:
        roots = sorted(set(root_set) - set(internal))
    if len(set(internal)) != len(internal):
        raise InputError("gadgets share internal vertices")
    return RootedGadget(tuple(roots), tuple(internal), frozenset(edges), kind)


def anti_edge(S, q: int, fresh: IdAllocator) -> RootedGadget:
    """K_q on S plus q-2 new vertices, minus the edge S."""
    a, b = _check_pair(S, q)
    xs = fresh.take(q - 2)
    verts = [a, b] + xs
    edges = frozenset(_pair(u, v) for u, v in itertools.combinations(verts, 2)) - {_pair(a, b)}
    return RootedGadget((a, b), tuple(xs), edges, "AntiEdge")


def fake_edge(S, q: int, fresh: IdAllocator) -> RootedGadget:
    """Anti-edges on every pair of S + (q-2 new vertices) other than S."""
    a, b = _check_pair(S, q)
    xs = fresh.take(q - 2)
    verts = [a, b] + xs
    parts = []
    for u, v in itertools.combinations(verts, 2):
        if {u, v} == {a, b}:
            continue
        parts.append(anti_edge((u, v), q, fresh))
    edges = set()
    internal = list(xs)
    for W in parts:
        edges |= W.edges
        internal.extend(W.internal)
    return RootedGadget((a, b), tuple(internal), frozenset(edges), "FakeEdge")


def _check_pair(S, q):
    S = tuple(S)
    if len(S) != 2 or S[0] == S[1]:
        raise InputError("S must be two distinct vertices")
    if q < 3:
        raise InputError("q must be at least 3")
    return S


def divisibility_residues(W: RootedGadget, q: int) -> dict:
    """Edge count mod C(q,2), root degrees and internal degrees mod q-1."""
    e_mod = q * (q - 1) // 2
    deg = {v: 0 for v in W.vertices}
    for u, v in W.edges:
        deg[u] += 1
        deg[v] += 1
    return {
        "edges": W.edge_count() % e_mod,
        "roots": {v: deg[v] % (q - 1) for v in W.roots},
        "internal": {v: deg[v] % (q - 1) for v in W.internal},
    }


def behaves_like_edge(W: RootedGadget, q: int) -> bool:
    r = divisibility_residues(W, q)
    return r["edges"] == 1 and all(x == 1 for x in r["roots"].values()) and all(
        x == 0 for x in r["internal"].values())


def rooted_degeneracy(W: RootedGadget, U=None) -> int:
    """Least d with an ordering of the non-root vertices in which each has
    at most d neighbours among U and earlier vertices (peeling)."""
    U = set(W.roots if U is None else U)
    verts = set(W.vertices)
    if not U <= verts:
        raise InputError("root set is not inside the gadget")
    adj = {v: set() for v in verts}
    for u, v in W.edges:
        adj[u].add(v)
        adj[v].add(u)
    remaining = verts - U
    present = set(verts)
    best = 0
    while remaining:
        v = min(remaining, key=lambda x: (len(adj[x] & present), x))
        best = max(best, len(adj[v] & present))
        remaining.discard(v)
        present.discard(v)
    return best


def rooted_degeneracy_bruteforce(W: RootedGadget, U=None) -> int:
    """Minimum over all orderings; only for tiny gadgets."""
    U = set(W.roots if U is None else U)
    others = sorted(set(W.vertices) - U)
    adj = {v: set() for v in W.vertices}
    for u, v in W.edges:
        adj[u].add(v)
        adj[v].add(u)
    best = None
    for order in itertools.permutations(others):
        seen = set(U)
        worst = 0
        for v in order:
            worst = max(worst, len(adj[v] & seen))
            seen.add(v)
            if best is not None and worst >= best:
                break
        if best is None or worst < best:
            best = worst
    return best or 0


@dataclass(frozen=True)
class RootedBooster:
    gadget: RootedGadget
    root: tuple
    on: Packing
    off: Packing

    @property
    def q(self) -> int:
        return len(self.root)

    def to_json(self) -> dict:
        d = self.gadget.to_json()
        d.update({"root": list(self.root), "on": [list(b) for b in self.on],
                  "off": [list(b) for b in self.off]})
        return d

    @classmethod
    def from_json(cls, data) -> "RootedBooster":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            q = len(data["root"])
            return cls(RootedGadget.from_json(data), tuple(data["root"]), Packing(data["on"], q),
                       Packing(data["off"], q))
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed booster JSON: {exc}") from None

    def relabel(self, mapping: dict) -> "RootedBooster":
        m = lambda v: mapping.get(v, v)
        rb = lambda P: Packing([tuple(m(v) for v in b) for b in P], self.q)
        return RootedBooster(self.gadget.relabel(mapping), tuple(m(v) for v in self.root), rb(self.on), rb(self.off))


def g_sphere(R, g: int, fresh: IdAllocator) -> RootedBooster:
    """Sphere booster rooted at the triangle R = (v, b_1, b_{2g})."""
    if g < 2:
        raise InputError("g must be at least 2")
    R = tuple(R)
    if len(R) != 3 or len(set(R)) != 3:
        raise InputError("root must be a triangle")
    v, b1, b_last = R
    u = fresh.one()
    mid = fresh.take(2 * g - 2)
    b = [None, b1] + mid + [b_last]  # 1-based
    m = 2 * g
    edges = set()
    for j in range(2, m):
        edges.add(_pair(v, b[j]))
    for j in range(1, m + 1):
        edges.add(_pair(u, b[j]))
    for j in range(1, m):
        edges.add(_pair(b[j], b[j + 1]))
    gadget = RootedGadget(R, tuple([u] + mid), frozenset(edges), "Sphere")
    on = [((v if j % 2 else u), b[j], b[j + 1]) for j in range(1, m)] + [(u, b[m], b[1])]
    off = [((u if j % 2 else v), b[j], b[j + 1]) for j in range(1, m)]
    return RootedBooster(gadget, R, Packing(on, 3), Packing(off, 3))


def _edges_of(P: Packing) -> set:
    out = set()
    for blk in P:
        out.update(_pair(x, y) for x, y in itertools.combinations(blk, 2))
    return out


def booster_defects(B: RootedBooster) -> list[str]:
    q = B.q
    R = tuple(sorted(B.root))
    problems = []
    if set(R) != set(B.gadget.roots) & set(R) or len(set(R)) != q:
        problems.append("root is not a q-set of root vertices")
    r_edges = {_pair(x, y) for x, y in itertools.combinations(R, 2)}
    body = set(B.gadget.edges)
    if body & r_edges:
        problems.append("body contains an edge of the root")
    if set(B.on) & set(B.off):
        problems.append("on and off decompositions share a clique")
    if R in B.on:
        problems.append("root clique used in the on decomposition")
    on_cnt = sum(len(b) * (len(b) - 1) // 2 for b in B.on)
    off_cnt = sum(len(b) * (len(b) - 1) // 2 for b in B.off)
    if _edges_of(B.off) != body or off_cnt != len(body):
        problems.append("off does not decompose the body")
    if _edges_of(B.on) != body | r_edges or on_cnt != len(body) + len(r_edges):
        problems.append("on does not decompose body plus root")
    return problems


def verify_booster(B: RootedBooster) -> bool:
    return not booster_defects(B)


def rooted_girth_at(P: Packing, R, limit: int | None = None) -> int | AtLeast:
    """Least g >= 1 with g cliques of P using fewer than g vertices off R."""
    blocks = list(P)
    R = set(R)
    top = len(blocks) if limit is None else min(limit, len(blocks))
    masks = [sum(1 << v for v in b if v not in R) for b in blocks]
    for g in range(1, top + 1):
        for sub in itertools.combinations(range(len(blocks)), g):
            m = 0
            for i in sub:
                m |= masks[i]
            if m.bit_count() < g:
                return g
    return AtLeast(top + 1)


def _min_girth(*vals):
    best = None
    for v in vals:
        key = (v.value - 0.5) if isinstance(v, AtLeast) else v
        if best is None or key < best[0]:
            best = (key, v)
    return best[1]


def rooted_girth(B: RootedBooster):
    """Minimum of girth(on), girth(off + root) and rooted girth of on at R."""
    problems = booster_defects(B)
    if problems:
        raise InputError("invalid booster: " + "; ".join(problems))
    off_r = Packing(list(B.off) + [tuple(sorted(B.root))], B.q)
    a = packing_girth(B.on, len(B.on))
    b = packing_girth(off_r, len(off_r))
    c = rooted_girth_at(B.on, B.root)
    return _min_girth(a, b, c)


def rooted_girth_bruteforce(B: RootedBooster):
    """All-subsets oracle for rooted girth (independent of the girth module)."""
    q = B.q

    def girth(blocks):
        for i in range(2, len(blocks) + 1):
            for sub in itertools.combinations(blocks, i):
                if len(set().union(*map(set, sub))) <= i * (q - 2) + 2:
                    return i
        return None

    vals = [girth(list(B.on)), girth(list(B.off) + [tuple(B.root)])]
    R = set(B.root)
    on = list(B.on)
    for i in range(1, len(on) + 1):
        if any(len(set().union(*map(set, sub)) - R) < i for sub in itertools.combinations(on, i)):
            vals.append(i)
            break
    vals = [v for v in vals if v is not None]
    return min(vals) if vals else None


# absorbers

@dataclass(frozen=True)
class Absorber:
    """Gadget A with decompositions of A (without L) and of A + L (with L)."""

    gadget: RootedGadget
    L: tuple  # edges of the absorbed graph
    q: int
    with_L: Packing
    without_L: Packing
    degeneracy: int
    source: str = "search"

    def to_json(self) -> dict:
        d = self.gadget.to_json()
        d.update({"L": [list(e) for e in self.L], "on": [list(b) for b in self.with_L],
                  "off": [list(b) for b in self.without_L], "degeneracy": self.degeneracy,
                  "source": self.source})
        return d

    def relabel(self, mapping: dict) -> "Absorber":
        m = lambda v: mapping.get(v, v)
        rb = lambda P: Packing([tuple(m(v) for v in b) for b in P], self.q)
        return Absorber(self.gadget.relabel(mapping), tuple(sorted(_pair(m(u), m(v)) for u, v in self.L)), self.q,
                        rb(self.with_L), rb(self.without_L), self.degeneracy, self.source)


def _graph_on(edges, extra=()):
    pairs = [tuple(e) for e in edges] + [tuple(e) for e in extra]
    n = max((max(e) for e in pairs), default=-1) + 1
    return graph_from_mask_edges(n, pairs)


def verify_absorber(A: RootedGadget, L: Graph, q: int = 3, witnesses=False, time_budget: float = 20.0):
    """V(L) independent in A and both A and A + L are K_q-decomposable."""
    if not is_divisible(L, q):
        raise InputError("L is not K_q-divisible")
    lv = set(L.non_isolated())
    if not lv <= set(A.roots):
        return (False, None, None) if witnesses else False
    for u, v in A.edges:
        if u in lv and v in lv:
            return (False, None, None) if witnesses else False
    l_edges = set(L.edges())
    if l_edges & set(A.edges):
        return (False, None, None) if witnesses else False
    res = []
    for extra in ((), l_edges):
        G = _graph_on(A.edges, extra)
        if G.edge_count == 0:
            res.append(Packing([], q))
            continue
        if not is_divisible(G, q):
            return (False, None, None) if witnesses else False
        try:
            res.append(exact_decomposition(G, q, 2, time_budget=time_budget))
        except ProvenInfeasible:
            return (False, None, None) if witnesses else False
    return (True, res[0], res[1]) if witnesses else True


def check_absorber(X: Absorber) -> bool:
    """Re-verify the attached witnesses without searching."""
    Lg = _graph_on(X.L)
    if not set(Lg.non_isolated()) <= set(X.gadget.roots):
        return False
    G0 = _graph_on(X.gadget.edges)
    G1 = _graph_on(X.gadget.edges, X.L)
    ok0 = (G0.edge_count == 0 and len(X.without_L) == 0) or is_decomposition(G0, X.without_L)
    ok1 = (G1.edge_count == 0 and len(X.with_L) == 0) or is_decomposition(G1, X.with_L)
    return ok0 and ok1


def _euler_circuits(L_edges, rng):
    """Closed trails covering each component of an even graph."""
    adj = {}
    for u, v in L_edges:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    for lst in adj.values():
        rng.shuffle(lst)
    used = set()
    trails = []
    for start in sorted(adj, key=lambda _: rng.random()):
        if all(_pair(start, w) in used for w in adj[start]):
            continue
        stack, circuit = [start], []
        while stack:
            x = stack[-1]
            nxt = None
            for w in adj[x]:
                if _pair(x, w) not in used:
                    nxt = w
                    break
            if nxt is None:
                circuit.append(stack.pop())
            else:
                used.add(_pair(x, nxt))
                stack.append(nxt)
        trails.append(circuit[:-1])
    return trails


def _trail_absorber(L: Graph, fresh: IdAllocator, rng, tries=50):
    """q = 3: every L-edge gets a private apex, apexes along each closed trail
    walk through a fan of triangles, so the walk edges decompose."""
    for _ in range(tries):
        trails = _euler_circuits(L.edges(), rng)
        if any(len(t) % 3 for t in trails):
            return None
        start = fresh.next
        edges, on, off, internal = set(), [], [], []
        ok = True
        for trail in trails:
            m = len(trail)
            rot = rng.randrange(m)
            trail = trail[rot:] + trail[:rot]
            hub = fresh.one()
            zs = []
            internal.append(hub)
            for _k in range(m // 3):
                x, y = fresh.take(2)
                internal += [x, y]
                zs += [hub, x, y]
                on.append((hub, x, y))
            walk = set()
            for i in range(m):
                walk.add(_pair(zs[i - 1], zs[i]))
            att = set()
            for i in range(m):
                vi, vn = trail[i], trail[(i + 1) % m]
                on.append((vi, vn, zs[i]))
                off.append((vi, zs[i - 1], zs[i]))
                for e in (_pair(vi, zs[i]), _pair(vn, zs[i])):
                    if e in att:
                        ok = False
                    att.add(e)
            if len(walk) != m:
                ok = False
            edges |= walk | att
        if ok:
            gadget = RootedGadget(tuple(sorted(L.non_isolated())), tuple(internal), frozenset(edges), "Absorber")
            try:
                return gadget, Packing(on, 3), Packing(off, 3)
            except GirthforgeError:
                pass
        fresh.next = max(fresh.next, start)
    return None


def _random_absorber(L: Graph, q: int, fresh: IdAllocator, rng, k: int, density: float, time_budget: float):
    roots = sorted(L.non_isolated())
    internal = fresh.take(k)
    edges = set()
    for u, v in itertools.combinations(internal, 2):
        if rng.random() < density:
            edges.add(_pair(u, v))
    for r in roots:
        for x in internal:
            if rng.random() < density * 0.6:
                edges.add(_pair(r, x))
    if q == 3:
        # fix parity: pair odd vertices through an internal middle vertex
        def deg(v):
            return sum(1 for e in edges if v in e)

        odd = [v for v in roots + internal if (deg(v) + L.degree(v) if v < L.n else deg(v)) % 2]
        rng.shuffle(odd)
        while len(odd) >= 2:
            a, b = odd.pop(), odd.pop()
            if a in internal or b in internal:
                edges ^= {_pair(a, b)}
            else:
                w = rng.choice(internal)
                edges ^= {_pair(a, w), _pair(w, b)}
        # fix edge count mod 3 by removing 4-cycles through internal vertices
        for _ in range(20):
            if len(edges) % 3 == 0:
                break
            a, b = rng.sample(internal, 2)
            c, d = rng.sample(roots + internal, 2)
            cyc = [_pair(a, c), _pair(c, b), _pair(b, d), _pair(d, a)]
            if len(set(cyc)) == 4 and all(e[0] != e[1] for e in cyc) and all(e in edges for e in cyc):
                edges -= set(cyc)
    rset = set(roots)
    edges = {e for e in edges if not (e[0] in rset and e[1] in rset)}
    gadget = RootedGadget(tuple(roots), tuple(internal), frozenset(edges), "Absorber")
    G0 = _graph_on(edges)
    if not is_divisible(G0, q):
        return None
    try:
        ok, w0, w1 = verify_absorber(gadget, L, q, witnesses=True, time_budget=time_budget)
    except (BudgetExhausted, InputError):
        return None
    if not ok:
        return None
    return gadget, w1, w0


def find_absorber(L: Graph, q: int = 3, fresh: IdAllocator | None = None, rng=None, attempts: int = 400,
                  max_internal: int = 14, time_budget: float = 60.0, seed: int = 0,
                  library: bool = True) -> Absorber:
    """Library constructions first, then randomized search; always verified."""
    if not is_divisible(L, q):
        raise InputError("L is not K_q-divisible")
    rng = rng or random.Random(seed)
    fresh = fresh or IdAllocator(L.n)
    if fresh.next < L.n:
        fresh.next = L.n
    l_edges = tuple(sorted(L.edges()))
    if not l_edges:
        return Absorber(RootedGadget((), (), frozenset(), "Absorber"), (), q, Packing([], q), Packing([], q), 0,
                        "empty")
    found = None
    source = None
    if q == 3 and library:
        try:
            P = exact_decomposition(L, 3, 2, time_budget=min(5.0, time_budget))
        except (ProvenInfeasible, BudgetExhausted):
            P = None
        if P is not None:
            spheres = [g_sphere(blk, 2, fresh) for blk in P]
            gadget = merge_gadgets([s.gadget for s in spheres], "Absorber", roots=sorted(L.non_isolated()))
            on = Packing([b for s in spheres for b in s.on], 3)
            off = Packing([b for s in spheres for b in s.off], 3)
            found, source = (gadget, on, off), "spheres" if len(P) > 1 else "sphere"
        if found is None:
            found = _trail_absorber(L, fresh, rng)
            source = "trail"
    start = time.monotonic()
    tries = 0
    v_l = len(L.non_isolated())
    while found is None:
        tries += 1
        if tries > attempts or time.monotonic() - start > time_budget:
            raise BudgetExhausted("no absorber found", {"attempts": tries - 1,
                                                          "seconds": round(time.monotonic() - start, 2)})
        k = rng.randint(min(v_l + 2, max_internal), max_internal)
        found = _random_absorber(L, q, fresh, rng, k, rng.uniform(0.5, 0.95), min(5.0, time_budget))
        source = "search"
    gadget, with_L, without_L = found
    X = Absorber(gadget, l_edges, q, with_L, without_L, rooted_degeneracy(gadget), source)
    if not check_absorber(X):
        raise SearchFailure("internal error: absorber failed re-verification")
    return X
