"""Greedy edge-disjoint embedding of rooted gadgets into a dense host.

Each member of a supergraph system is a rooted gadget whose roots are
vertices of the base graph J.  Members are placed one at a time; a placement
must avoid (A) every edge already used by earlier images and every edge of
J, and (B) must not push the per-vertex load counter (how many images use a
vertex as an internal vertex) past ``m``.  Keeping loads below ``m`` is what
bounds the maximum degree of the union of images.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .errors import InputError, SearchFailure
from .gadgets import RootedGadget
from .graph import Graph, bits, max_degree


@dataclass
class SupergraphSystem:
    base: Graph
    family: list  # (H edges, RootedGadget)
    C: int

    def __post_init__(self):
        J = self.base
        seen_internal = set()
        per_edge = {}
        for i, (H, W) in enumerate(self.family):
            H = tuple((min(e), max(e)) for e in H)
            for e in H:
                if not J.has_edge(*e):
                    raise InputError(f"member {i}: {e} is not an edge of the base graph")
                per_edge[e] = per_edge.get(e, 0) + 1
            if max(len(W.vertices), len(W.edges)) > self.C:
                raise InputError(f"member {i} has more than C={self.C} vertices or edges")
            for r in W.roots:
                if not 0 <= r < J.n or J.degree(r) == 0:
                    raise InputError(f"member {i}: root {r} is not a vertex of the base graph")
            if seen_internal & set(W.internal):
                raise InputError(f"member {i} reuses internal ids")
            seen_internal |= set(W.internal)
        for e, k in per_edge.items():
            if k > self.C:
                raise InputError(f"edge {e} is in {k} > C members")


@dataclass
class Embedding:
    vertex_map: dict  # internal id -> host vertex
    image: Graph
    members: list = field(default_factory=list)  # per member: RootedGadget relabelled into the host
    stats: dict = field(default_factory=dict)

    def max_degree(self) -> int:
        return max_degree(self.image) if self.image.n else 0


def _order(W: RootedGadget):
    """Internal vertices so that each has few earlier (or root) neighbours."""
    adj = {v: set() for v in W.vertices}
    for u, v in W.edges:
        adj[u].add(v)
        adj[v].add(u)
    present = set(W.vertices)
    remaining = set(W.internal)
    out = []
    while remaining:
        v = min(remaining, key=lambda x: (len(adj[x] & present), x))
        out.append(v)
        remaining.discard(v)
        present.discard(v)
    out.reverse()
    return out, adj


def count_embeddings(W: RootedGadget, G: Graph, forbidden: Graph | None = None, cap: int | None = None) -> int:
    """Injective edge-preserving maps of W into G fixing roots, avoiding
    ``forbidden`` edges; counting stops at ``cap``."""
    order, adj = _order(W)
    roots = set(W.roots)
    n = G.n
    for r in roots:
        if not 0 <= r < n:
            raise InputError(f"root {r} outside host")
    for u, v in W.edges:
        if u in roots and v in roots and not G.has_edge(u, v):
            return 0
    fb = forbidden.resized(n).adj if forbidden is not None else (0,) * n
    ok_adj = [G.adj[v] & ~fb[v] for v in range(n)]
    for u, v in W.edges:
        if u in roots and v in roots and not ok_adj[u] >> v & 1:
            return 0
    full = (1 << n) - 1
    root_mask = sum(1 << r for r in roots)
    pos = {}
    count = 0

    def rec(i, used):
        nonlocal count
        if cap is not None and count >= cap:
            return
        if i == len(order):
            count += 1
            return
        x = order[i]
        cand = full & ~used
        for y in adj[x]:
            if y in roots:
                cand &= ok_adj[y]
            elif y in pos:
                cand &= ok_adj[pos[y]]
        for h in bits(cand):
            pos[x] = h
            rec(i + 1, used | (1 << h))
            del pos[x]

    rec(0, root_mask)
    return count if cap is None else min(count, cap)


def load_cap(C: int, C_prime: float, delta: int) -> int:
    return max(1, int(math.sqrt(C_prime) / (C * 4) * delta))


def embed_system(S: SupergraphSystem, G: Graph, C_prime: float = 50, rng=None, seed: int = 0,
                 retries: int = 40, restarts: int = 5) -> Embedding:
    """Place every member; raises SearchFailure naming the member and the
    binding constraint class ("A": no free placement, "B": loads)."""
    rng = rng or random.Random(seed)
    J = S.base.resized(G.n) if S.base.n <= G.n else None
    if J is None:
        raise InputError("base graph larger than host")
    if not J.is_subgraph_of(G):
        raise InputError("base graph must be inside the host")
    delta = max_degree(J) if J.edge_count else 0
    if delta and delta > G.n / C_prime:
        pass  # the guarantee needs Delta(J) <= n / C'; we still try
    m = load_cap(S.C, C_prime, delta)
    last = None
    for attempt in range(restarts):
        try:
            emb = _embed_once(S, G, J, m, random.Random(rng.getrandbits(64)), retries)
        except SearchFailure as exc:
            last = exc
            continue
        emb.stats.update({"restarts": attempt + 1, "m": m, "delta_J": delta})
        problems = verify_embedding(S, G, emb)
        if problems:
            raise SearchFailure("internal error: embedding failed re-verification: " + problems[0])
        return emb
    raise last


def place_gadget(W: RootedGadget, free, used_adj, load, m, rng, retries=40, n=None, order=None):
    """Random greedy placement of W's internal vertices.

    ``free[v]`` is the mask of host edges usable at v, ``used_adj[v]`` the
    mask already taken.  Returns (mapping, None) or (None, "A"|"B")."""
    n = len(free) if n is None else n
    if order is None:
        order, adj = _order(W)
    else:
        order, adj = order
    roots = set(W.roots)
    full = (1 << n) - 1
    blocked_by = "A"
    for _ in range(retries):
        pos = {}
        used = sum(1 << r for r in roots)
        fail = None
        for x in order:
            cand = full & ~used
            for y in adj[x]:
                h = y if y in roots else pos.get(y)
                if h is not None:
                    cand &= free[h] & ~used_adj[h]
            if not cand:
                fail = "A"
                break
            ok = [h for h in bits(cand) if load[h] < m]
            if not ok:
                fail = "B"
                break
            h = rng.choice(ok)
            pos[x] = h
            used |= 1 << h
        if fail is None:
            return pos, None
        blocked_by = fail
    return None, blocked_by


def _embed_once(S, G, J, m, rng, retries):
    n = G.n
    used_adj = [0] * n  # image edges so far
    load = [0] * n
    free = [G.adj[v] & ~J.adj[v] for v in range(n)]
    vmap = {}
    members = []
    for idx, (_H, W) in enumerate(S.family):
        placed, blocked_by = place_gadget(W, free, used_adj, load, m, rng, retries, n)
        if placed is None:
            raise SearchFailure(f"member {idx} could not be placed", {"member": idx, "constraint": blocked_by})
        mw = W.relabel(placed)
        for u, v in mw.edges:
            used_adj[u] |= 1 << v
            used_adj[v] |= 1 << u
        for x, h in placed.items():
            load[h] += 1
            vmap[x] = h
        members.append(mw)
    image = Graph(n, tuple(used_adj))
    return Embedding(vmap, image, members, {"max_load": max(load) if load else 0})


def verify_embedding(S: SupergraphSystem, G: Graph, emb: Embedding) -> list[str]:
    """Independent checks: edges in G, pairwise disjoint, none in J, injective."""
    problems = []
    J = S.base.resized(G.n)
    seen = set()
    for i, ((_H, W), mw) in enumerate(zip(S.family, emb.members)):
        if tuple(mw.roots) != tuple(W.roots):
            problems.append(f"member {i}: roots moved")
        hv = [emb.vertex_map[x] for x in W.internal]
        if len(set(hv)) != len(hv) or set(hv) & set(W.roots):
            problems.append(f"member {i}: not injective")
        for u, v in W.edges:
            a = emb.vertex_map.get(u, u) if u in W.internal else u
            b = emb.vertex_map.get(v, v) if v in W.internal else v
            e = (min(a, b), max(a, b))
            if not G.has_edge(*e):
                problems.append(f"member {i}: {e} not in host")
            if J.has_edge(*e):
                problems.append(f"member {i}: {e} is an edge of the base graph")
            if e in seen:
                problems.append(f"member {i}: {e} reused")
            seen.add(e)
    if set(emb.image.edges()) != seen:
        problems.append("image does not match member edges")
    return problems
