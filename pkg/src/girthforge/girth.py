"""Packings, configurations and girth.

A set of ``i`` edge-disjoint q-cliques spanning at most ``i*(q-2)+2``
vertices is an *i-configuration*; the girth of a packing is the least
``i >= 2`` for which it contains one.  The searches below only grow
connected sets of cliques (each new clique meets the current span), which
is enough because a disconnected configuration always has a component that
is itself a smaller configuration.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Iterable

from .errors import ConfigurationOverflow, InputError, InvalidPacking, NotAClique
from .graph import Clique, Graph, clique_index, mask_of


@dataclass(frozen=True)
class AtLeast:
    """Girth lower bound reported when no configuration was found."""

    value: int

    def __str__(self):
        return f">={self.value}"


def girth_at_least(girth, g: int) -> bool:
    """True when a girth value (int or :class:`AtLeast`) is known to be >= g."""
    if isinstance(girth, AtLeast):
        return girth.value >= g
    return girth >= g


def girth_to_json(girth):
    if isinstance(girth, AtLeast):
        return {"at_least": girth.value}
    return girth


class Packing:
    """An edge-disjoint set of q-cliques, stored as sorted vertex tuples."""

    __slots__ = ("q", "blocks", "_edge_owner")

    def __init__(self, blocks: Iterable, q: int | None = None):
        bl = sorted({tuple(sorted(b)) for b in blocks})
        if q is None:
            if not bl:
                raise InputError("q is required for an empty packing")
            q = len(bl[0])
        for b in bl:
            if len(b) != q or len(set(b)) != q:
                raise InvalidPacking(f"block {b} is not a {q}-set")
        owner = {}
        for b in bl:
            for e in itertools.combinations(b, 2):
                if e in owner:
                    raise InvalidPacking(f"edge {e} covered by {owner[e]} and {b}")
                owner[e] = b
        self.q = q
        self.blocks = tuple(bl)
        self._edge_owner = owner

    @classmethod
    def from_ids(cls, index, ids) -> "Packing":
        return cls([index.vertices(c) for c in ids], index.q)

    def __len__(self):
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def __contains__(self, block):
        return tuple(sorted(block)) in set(self.blocks)

    def __eq__(self, other):
        return isinstance(other, Packing) and self.q == other.q and self.blocks == other.blocks

    def __hash__(self):
        return hash((self.q, self.blocks))

    def __repr__(self):
        return f"Packing(q={self.q}, blocks={len(self.blocks)})"

    def covered_edges(self) -> set:
        return set(self._edge_owner)

    def union(self, other: "Packing") -> "Packing":
        return Packing(self.blocks + other.blocks, self.q)

    def vertex_count(self) -> int:
        return len({v for b in self.blocks for v in b})

    def ids(self, index) -> list[int]:
        return [index.lookup(b) for b in self.blocks]

    def to_json(self) -> dict:
        return {"q": self.q, "blocks": [list(b) for b in self.blocks]}

    @classmethod
    def from_json(cls, data) -> "Packing":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            return cls([tuple(b) for b in data["blocks"]], int(data["q"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed packing JSON: {exc}") from None


@dataclass(frozen=True)
class ConfigurationWitness:
    cliques: tuple
    span: frozenset
    i: int

    def to_json(self) -> dict:
        return {
            "i": self.i,
            "span": sorted(self.span),
            "cliques": [list(c.vertices if isinstance(c, Clique) else c) for c in self.cliques],
        }


def is_decomposition(G: Graph, P: Packing) -> bool:
    """Every edge of G covered exactly once by P."""
    for b in P.blocks:
        if max(b) >= G.n or any(not G.has_edge(u, v) for u, v in itertools.combinations(b, 2)):
            raise NotAClique(f"{b} is not a clique of the host")
    return len(P.blocks) * (P.q * (P.q - 1) // 2) == G.edge_count


def uncovered_edges(G: Graph, P: Packing) -> list:
    cov = P.covered_edges()
    return [e for e in G.edges() if e not in cov]


# connected-set search

def connected_sets(masks, by_vertex, max_size, span_budget, edge_disjoint=False, roots=None, anchored=False):
    """Yield ``(members, span_mask)`` for every connected set of at most
    ``max_size`` cliques whose span never exceeds ``span_budget(max_size)``.

    ``span_budget`` may be an int or a callable ``k -> int`` giving the
    largest span tolerated for a set that can still be grown to size k.
    Each set is produced exactly once (ESU enumeration rooted at its smallest
    member); ``roots`` restricts which members may act as that smallest one.
    With ``anchored`` the roots need not be smallest: every connected set
    containing a given root is produced once for that root.
    """
    budget = span_budget if callable(span_budget) else (lambda k, b=span_budget: b)
    cap = budget(max_size)
    n_blocks = len(masks)

    def neigh(w, root):
        m = masks[w]
        out = set()
        v_bits = m
        while v_bits:
            low = v_bits & -v_bits
            v_bits ^= low
            for u in by_vertex.get(low.bit_length() - 1, ()):
                if u > root or (anchored and u != root):
                    out.add(u)
        return out

    def grow(sub, span, ext, root):
        yield sub, span
        if len(sub) == max_size:
            return
        ext = list(ext)
        while ext:
            w = ext.pop()
            mw = masks[w]
            new_span = span | mw
            if new_span.bit_count() > cap:
                continue
            if edge_disjoint and any((masks[s] & mw).bit_count() >= 2 for s in sub):
                continue
            extra = [u for u in neigh(w, root) if masks[u] & span == 0 and u != w]
            seen = set(ext)
            new_ext = ext + [u for u in extra if u not in seen]
            yield from grow(sub + [w], new_span, new_ext, root)

    for r in (range(n_blocks) if roots is None else roots):
        if masks[r].bit_count() > cap:
            continue
        ext = [u for u in neigh(r, r) if u != r]
        yield from grow([r], masks[r], ext, r)


def _index_blocks(blocks):
    masks = [mask_of(b) for b in blocks]
    by_vertex: dict[int, list[int]] = {}
    for i, b in enumerate(blocks):
        for v in b:
            by_vertex.setdefault(v, []).append(i)
    return masks, by_vertex


def find_configuration(blocks, q: int, i_max: int, i_min: int = 2, edge_disjoint=False):
    """Smallest configuration with ``i_min <= i <= i_max`` among ``blocks``
    (as a list of member indices), or None."""
    if i_max < i_min:
        return None
    masks, by_vertex = _index_blocks(blocks)
    best = None
    limit = i_max
    while limit >= i_min:
        found = None
        for sub, span in connected_sets(masks, by_vertex, limit, limit * (q - 2) + 2, edge_disjoint):
            k = len(sub)
            if k >= i_min and span.bit_count() <= k * (q - 2) + 2:
                found = list(sub)
                break
        if found is None:
            break
        best = found
        limit = len(found) - 1
    return best


def packing_girth(P: Packing, g_max: int, with_witness: bool = False):
    """Least i in [2, g_max] with an i-configuration in P, else AtLeast(g_max+1)."""
    if not isinstance(P, Packing):
        raise InvalidPacking("expected a Packing")
    if g_max < 2:
        raise InputError("g_max must be at least 2")
    found = find_configuration(P.blocks, P.q, g_max)
    if found is None:
        result = AtLeast(g_max + 1)
        return (result, None) if with_witness else result
    members = tuple(P.blocks[i] for i in found)
    span = frozenset(v for b in members for v in b)
    if with_witness:
        return len(found), ConfigurationWitness(members, span, len(found))
    return len(found)


class _MinimalityOracle:
    """Memoized test for "contains a smaller configuration"."""

    def __init__(self, index, q):
        self.index = index
        self.q = q
        self.memo: dict[frozenset, bool] = {}

    def has_smaller(self, ids: frozenset) -> bool:
        hit = self.memo.get(ids)
        if hit is not None:
            return hit
        i = len(ids)
        res = False
        if i > 2:
            members = sorted(ids)
            for j in range(i - 1, 1, -1):
                if res:
                    break
                for sub in itertools.combinations(members, j):
                    span = 0
                    for c in sub:
                        span |= self.index.vertex_masks[c]
                    if span.bit_count() <= j * (self.q - 2) + 2:
                        res = True
                        break
        self.memo[ids] = res
        return res


def enumerate_erdos_configurations(G: Graph, q: int, g: int, limit: int | None = None, i_min: int = 3):
    """All minimal configurations with i_min <= i <= g among the q-cliques of
    G: i edge-disjoint cliques on exactly i(q-2)+2 vertices with no smaller
    configuration inside.  Raises ConfigurationOverflow past ``limit``."""
    if g < 3:
        raise InputError("g must be at least 3")
    index = clique_index(G, q)
    masks = index.vertex_masks
    by_vertex = {v: lst for v, lst in enumerate(index.by_vertex)}
    oracle = _MinimalityOracle(index, q)
    out: list[ConfigurationWitness] = []
    for sub, span in connected_sets(masks, by_vertex, g, g * (q - 2) + 2, edge_disjoint=True):
        i = len(sub)
        if i < i_min:
            continue
        if span.bit_count() != i * (q - 2) + 2:
            continue
        ids = frozenset(sub)
        if oracle.has_smaller(ids):
            continue
        cl = tuple(index.cliques[c] for c in sorted(ids))
        out.append(ConfigurationWitness(cl, frozenset(_bits_list(span)), i))
        if limit is not None and len(out) > limit:
            raise ConfigurationOverflow(f"more than {limit} configurations", len(out), out)
    out.sort(key=lambda w: (w.i, [c.id for c in w.cliques]))
    return out


def _bits_list(mask):
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def verify_witness(w: ConfigurationWitness, q: int) -> bool:
    """Edge-disjoint cliques whose union is the span, within budget."""
    blocks = [c.vertices if isinstance(c, Clique) else tuple(c) for c in w.cliques]
    if len(blocks) != w.i:
        return False
    for a, b in itertools.combinations(blocks, 2):
        if len(set(a) & set(b)) >= 2:
            return False
    span = {v for b in blocks for v in b}
    return span == set(w.span) and len(span) <= w.i * (q - 2) + 2
