"""Dense simple graphs stored as adjacency bitsets, plus clique enumeration.

Vertices are ``0..n-1`` and ``adj[v]`` is a Python int whose bit ``u`` is set
when ``uv`` is an edge.  Graphs never change after construction; every
operation that "modifies" a graph returns a new one.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from .errors import DuplicateEdge, InputError, NotAClique, SelfLoop, VertexOutOfRange


def bits(mask: int):
    """Yield the indices of set bits in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


class Graph:
    __slots__ = ("n", "adj", "edge_count", "_edges", "_edge_ids")

    def __init__(self, n: int, adj):
        self.n = n
        self.adj = tuple(adj)
        self.edge_count = sum(a.bit_count() for a in self.adj) // 2
        self._edges = None
        self._edge_ids = None

    # basic queries
    def degree(self, v: int) -> int:
        return self.adj[v].bit_count()

    def degrees(self) -> list[int]:
        return [a.bit_count() for a in self.adj]

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj[u] >> v & 1)

    def neighbors(self, v: int) -> list[int]:
        return list(bits(self.adj[v]))

    def edges(self) -> list[tuple[int, int]]:
        """Sorted edge list; the position of an edge is its edge id."""
        if self._edges is None:
            out = []
            for u in range(self.n):
                out.extend((u, v) for v in bits(self.adj[u] >> (u + 1) << (u + 1)))
            self._edges = out
        return self._edges

    def edge_ids(self) -> dict[tuple[int, int], int]:
        if self._edge_ids is None:
            self._edge_ids = {e: i for i, e in enumerate(self.edges())}
        return self._edge_ids

    def edge_id(self, u: int, v: int) -> int:
        if u > v:
            u, v = v, u
        return self.edge_ids()[(u, v)]

    def non_isolated(self) -> list[int]:
        return [v for v in range(self.n) if self.adj[v]]

    # derived graphs
    def with_edges(self, edges) -> "Graph":
        """Union with extra edges (must not already be present)."""
        adj = list(self.adj)
        for u, v in edges:
            if adj[u] >> v & 1:
                raise DuplicateEdge(f"edge {u}-{v} already present")
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        return Graph(self.n, adj)

    def without_edges(self, edges) -> "Graph":
        adj = list(self.adj)
        for u, v in edges:
            adj[u] &= ~(1 << v)
            adj[v] &= ~(1 << u)
        return Graph(self.n, adj)

    def union(self, other: "Graph") -> "Graph":
        n = max(self.n, other.n)
        a = list(self.adj) + [0] * (n - self.n)
        b = list(other.adj) + [0] * (n - other.n)
        return Graph(n, [x | y for x, y in zip(a, b)])

    def difference(self, other: "Graph") -> "Graph":
        adj = list(self.adj)
        for v in range(min(self.n, other.n)):
            adj[v] &= ~other.adj[v]
        return Graph(self.n, adj)

    def intersection(self, other: "Graph") -> "Graph":
        adj = [0] * self.n
        for v in range(min(self.n, other.n)):
            adj[v] = self.adj[v] & other.adj[v]
        return Graph(self.n, adj)

    def is_subgraph_of(self, other: "Graph") -> bool:
        if self.n > other.n:
            return all(not self.adj[v] for v in range(other.n, self.n)) and all(
                self.adj[v] & ~other.adj[v] == 0 for v in range(other.n)
            )
        return all(self.adj[v] & ~other.adj[v] == 0 for v in range(self.n))

    def edge_disjoint(self, other: "Graph") -> bool:
        return all(a & b == 0 for a, b in zip(self.adj, other.adj))

    def induced(self, vertices) -> "Graph":
        """Subgraph induced on ``vertices`` (keeps the vertex ids)."""
        m = mask_of(vertices)
        return Graph(self.n, [a & m if m >> v & 1 else 0 for v, a in enumerate(self.adj)])

    def resized(self, n: int) -> "Graph":
        """Same edges on a vertex set of size ``n``."""
        if n < self.n and any(self.adj[v] for v in range(n, self.n)):
            raise InputError("cannot shrink: edges use high vertices")
        adj = list(self.adj[:n]) + [0] * max(0, n - self.n)
        return Graph(n, adj)

    def __eq__(self, other):
        return isinstance(other, Graph) and self.n == other.n and self.adj == other.adj

    def __hash__(self):
        return hash((self.n, self.adj))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.edge_count})"


def new_graph(n: int, edges) -> Graph:
    """Build a graph, rejecting bad vertex ids, loops and repeated pairs."""
    if n < 0:
        raise InputError("negative vertex count")
    adj = [0] * n
    for e in edges:
        u, v = e
        if not (0 <= u < n and 0 <= v < n):
            raise VertexOutOfRange(f"edge {u}-{v} outside 0..{n - 1}")
        if u == v:
            raise SelfLoop(f"self-loop at {u}")
        if adj[u] >> v & 1:
            raise DuplicateEdge(f"duplicate edge {min(u, v)}-{max(u, v)}")
        adj[u] |= 1 << v
        adj[v] |= 1 << u
    return Graph(n, adj)


def empty_graph(n: int) -> Graph:
    return Graph(n, [0] * n)


def complete_graph(n: int) -> Graph:
    full = (1 << n) - 1
    return Graph(n, [full & ~(1 << v) for v in range(n)])


def cycle_graph(n: int) -> Graph:
    return new_graph(n, [(i, (i + 1) % n) for i in range(n)])


def graham_blowup(part: int, cycle: int = 4) -> Graph:
    """Blow-up of C_4 (or another cycle): each vertex becomes a clique of
    size ``part``, adjacent cycle vertices become complete bipartite joins."""
    n = part * cycle
    edges = []
    for c in range(cycle):
        block = range(c * part, (c + 1) * part)
        edges.extend(itertools.combinations(block, 2))
        nxt = (c + 1) % cycle
        if cycle == 2 and c == 1:
            break
        edges.extend((u, v) for u in block for v in range(nxt * part, (nxt + 1) * part))
    return new_graph(n, [(min(e), max(e)) for e in edges])


def disjoint_union(*graphs: Graph) -> Graph:
    adj = []
    offset = 0
    for g in graphs:
        adj.extend(a << offset for a in g.adj)
        offset += g.n
    return Graph(offset, adj)


def graph_from_mask_edges(n: int, edges) -> Graph:
    """Like :func:`new_graph` but silently ignores repeats (internal use)."""
    adj = [0] * n
    for u, v in edges:
        adj[u] |= 1 << v
        adj[v] |= 1 << u
    return Graph(n, adj)


def min_degree(G: Graph) -> int:
    if G.n < 1:
        raise InputError("min_degree of the empty vertex set")
    return min(G.degrees())


def max_degree(G: Graph) -> int:
    if G.n < 1:
        raise InputError("max_degree of the empty vertex set")
    return max(G.degrees())


def is_divisible(G: Graph, q: int) -> bool:
    """Clique divisibility: C(q,2) | e(G) and (q-1) | every degree."""
    if q < 3:
        raise InputError("q must be at least 3")
    if G.edge_count % math.comb(q, 2):
        return False
    return all(d % (q - 1) == 0 for d in G.degrees())


class Clique(NamedTuple):
    vertices: tuple
    id: int


def _extend(adj, prefix, cand, need, out):
    if need == 0:
        out.append(tuple(prefix))
        return
    while cand:
        if cand.bit_count() < need:
            return
        low = cand & -cand
        v = low.bit_length() - 1
        cand ^= low
        prefix.append(v)
        _extend(adj, prefix, cand & adj[v], need - 1, out)
        prefix.pop()


def _clique_tuples(G: Graph, q: int, start=(), cand=None) -> list[tuple]:
    out: list[tuple] = []
    if cand is None:
        cand = (1 << G.n) - 1
    _extend(G.adj, list(start), cand, q - len(start), out)
    return out


def enumerate_cliques(G: Graph, q: int) -> list[Clique]:
    """Every q-clique once, lexicographically, with ids in that order."""
    if q < 2:
        raise InputError("q must be at least 2")
    return [Clique(t, i) for i, t in enumerate(_clique_tuples(G, q))]


def cliques_through(G: Graph, S, q: int) -> list[Clique]:
    """All q-cliques containing the vertex set ``S``.  Ids are positions in
    :func:`enumerate_cliques` order; pass an index to avoid recomputation."""
    S = sorted(set(S))
    if len(S) > q:
        raise InputError("|S| exceeds q")
    for v in S:
        if not 0 <= v < G.n:
            raise VertexOutOfRange(f"vertex {v}")
    for u, v in itertools.combinations(S, 2):
        if not G.has_edge(u, v):
            raise NotAClique(f"{u}-{v} is not an edge")
    index = clique_index(G, q)
    return [index.cliques[c] for c in index.through(S)]


class CliqueIndex:
    """Shared enumeration handle: cliques of ``graph`` with dense ids,
    together with edge ids and incidence lists."""

    def __init__(self, graph: Graph, q: int):
        self.graph = graph
        self.q = q
        self.cliques = enumerate_cliques(graph, q)
        self.id_of = {c.vertices: c.id for c in self.cliques}
        eids = graph.edge_ids()
        self.edge_sets = [
            tuple(eids[p] for p in itertools.combinations(c.vertices, 2)) for c in self.cliques
        ]
        self.by_edge: list[list[int]] = [[] for _ in range(graph.edge_count)]
        for cid, es in enumerate(self.edge_sets):
            for e in es:
                self.by_edge[e].append(cid)
        self.by_vertex: list[list[int]] = [[] for _ in range(graph.n)]
        for c in self.cliques:
            for v in c.vertices:
                self.by_vertex[v].append(c.id)
        self.vertex_masks = [mask_of(c.vertices) for c in self.cliques]

    def __len__(self):
        return len(self.cliques)

    def vertices(self, cid: int) -> tuple:
        return self.cliques[cid].vertices

    def lookup(self, vertices) -> int:
        key = tuple(sorted(vertices))
        try:
            return self.id_of[key]
        except KeyError:
            raise NotAClique(f"{key} is not a {self.q}-clique of the host") from None

    def through(self, S) -> list[int]:
        S = sorted(set(S))
        if not S:
            return list(range(len(self.cliques)))
        if len(S) >= 2:
            base = self.by_edge[self.graph.edge_id(S[0], S[1])]
        else:
            base = self.by_vertex[S[0]]
        m = mask_of(S)
        return [c for c in base if self.vertex_masks[c] & m == m]


_INDEX_CACHE: dict = {}


def clique_index(G: Graph, q: int) -> CliqueIndex:
    """Memoized :class:`CliqueIndex` (graphs are immutable, so this is safe)."""
    key = (G.n, G.adj, q)
    idx = _INDEX_CACHE.get(key)
    if idx is None:
        if len(_INDEX_CACHE) > 64:
            _INDEX_CACHE.clear()
        idx = _INDEX_CACHE[key] = CliqueIndex(G, q)
    return idx


@dataclass
class Config:
    """Tunable constants, sized for hosts with a few dozen vertices."""

    q: int = 3
    g: int = 4
    epsilon: float = 0.1
    alpha: float = 0.25
    beta: float = 0.125
    gamma: float = 0.05
    p: float = 0.0
    C: int = 4
    C_prime: int = 50
    sigma: float = 0.5
    rng_seed: int = 0
    reserve_threshold: float | None = None
    max_retries: int = 20
    budget_s: float = 240.0
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.q < 3:
            raise InputError("q must be at least 3")
        if self.g < 2:
            raise InputError("g must be at least 2")
        for name in ("epsilon", "alpha", "beta", "gamma", "sigma"):
            val = getattr(self, name)
            if not 0 < val < 1:
                raise InputError(f"{name} must lie in (0, 1)")
        if not 0 <= self.p <= 1:
            raise InputError("p must lie in [0, 1]")
        if self.C < 1 or self.C_prime < 1:
            raise InputError("C and C_prime must be positive")
        if not 0 <= self.rng_seed < 2**64:
            raise InputError("rng_seed must be a 64-bit unsigned integer")


# text format

def parse_graph(text: str) -> Graph:
    """Parse ``n m`` then ``m`` lines ``u v``; ``#`` starts a comment."""
    rows = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append(line.split())
    if not rows:
        raise InputError("empty graph file")
    try:
        n, m = (int(x) for x in rows[0])
        edges = [(int(a), int(b)) for a, b in rows[1:]]
    except ValueError as exc:
        raise InputError(f"malformed graph file: {exc}") from None
    if len(edges) != m:
        raise InputError(f"header says {m} edges, found {len(edges)}")
    return new_graph(n, edges)


def format_graph(G: Graph) -> str:
    lines = [f"{G.n} {G.edge_count}"]
    lines.extend(f"{u} {v}" for u, v in G.edges())
    return "\n".join(lines) + "\n"


def read_graph(path) -> Graph:
    with open(path, encoding="ascii") as fh:
        return parse_graph(fh.read())


def write_graph(G: Graph, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(format_graph(G))
