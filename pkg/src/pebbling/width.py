"""Treewidth, coalgebra number and pebble number.

Two independent routes to treewidth live here: :func:`find_k_traversal`
searches for a k-traversal directly, and :func:`treewidth_oracle` runs the
classic subset dynamic program over elimination orderings.  They agree on
every input exactly when traversals of width ``k`` and treewidth ``k - 1``
coincide, which is what the tests check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from .comonad import KTraversal, coalgebra_of_traversal
from .errors import SizeCapExceeded
from .structures import Structure, core, encode_element, gaifman

DEFAULT_MAX_UNIVERSE = 20


def _adjacency(a: Structure):
    g = gaifman(a)
    idx = {x: i for i, x in enumerate(a.universe)}
    adj = [0] * len(a.universe)
    for x, y in g.edges():
        adj[idx[x]] |= 1 << idx[y]
        adj[idx[y]] |= 1 << idx[x]
    return adj


def _bits(mask):
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


def _components(mask, adj):
    """Connected components of the subgraph induced by ``mask``, least vertex first."""
    out = []
    while mask:
        low = mask & -mask
        comp = low
        frontier = low
        while frontier:
            v = (frontier & -frontier).bit_length() - 1
            frontier &= frontier - 1
            new = adj[v] & mask & ~comp
            comp |= new
            frontier |= new
        out.append(comp)
        mask &= ~comp
    return out


def find_k_traversal(a: Structure, k: int) -> KTraversal | None:
    """Search for a k-traversal of ``a``, or return ``None``.

    A traversal is an elimination forest in which every element's label
    differs from the labels of the ancestors it must stay "live" alongside.
    The search picks, for each connected piece ``Y`` of the structure, a root
    whose removal splits ``Y`` into pieces that are solvable recursively.
    Ancestors adjacent to ``Y`` (its neighbourhood) each hold a pebble that
    cannot be reused inside ``Y``, so ``Y`` is feasible only when that
    neighbourhood has fewer than ``k`` elements.  Roots are tried in
    canonical order and labels are assigned greedily afterwards.
    """
    if k < 1:
        return None
    n = len(a.universe)
    adj = _adjacency(a)

    def nbhd(mask):
        out = 0
        for v in _bits(mask):
            out |= adj[v]
        return out & ~mask

    @lru_cache(maxsize=None)
    def solve(mask):
        # returns chosen root or -1; mask is connected
        if bin(nbhd(mask)).count("1") >= k:
            return -1
        for r in _bits(mask):
            rest = mask & ~(1 << r)
            if all(solve(c) >= 0 for c in _components(rest, adj)):
                return r
        return -1

    full = (1 << n) - 1
    parent = [None] * n
    pieces = _components(full, adj)
    if any(solve(c) < 0 for c in pieces):
        return None

    # build the forest
    children_of = {}

    def build(mask, par):
        r = solve(mask)
        parent[r] = par
        subs = _components(mask & ~(1 << r), adj)
        children_of[r] = subs
        for c in subs:
            build(c, r)

    for c in pieces:
        build(c, None)

    # labels: the least label not held by a live ancestor; an ancestor is
    # live while some element below it (inclusive) is adjacent to it
    subtree = {}

    def span(v):
        m = 1 << v
        for c in children_of[v]:
            m |= c
        subtree[v] = m
        return m

    for v in range(n):
        span(v)
    label = [0] * n
    order = sorted(range(n), key=lambda v: _depth(parent, v))
    for v in order:
        used = set()
        u = parent[v]
        while u is not None:
            if adj[u] & subtree[v]:
                used.add(label[u])
            u = parent[u]
        lab = 1
        while lab in used:
            lab += 1
        label[v] = lab
    if max(label, default=1) > k:
        raise AssertionError("label budget exceeded; search invariant broken")
    u = a.universe
    t = KTraversal(
        a,
        k,
        {u[v]: (None if parent[v] is None else u[parent[v]]) for v in range(n)},
        {u[v]: label[v] for v in range(n)},
    )
    return t


def _depth(parent, v):
    d = 0
    while parent[v] is not None:
        v = parent[v]
        d += 1
    return d


def coalgebra_number(a: Structure) -> int:
    """Least ``k`` admitting a k-traversal (and hence a coalgebra)."""
    for k in range(1, len(a.universe) + 1):
        if find_k_traversal(a, k) is not None:
            return k
    raise AssertionError("the linear traversal always exists at k = |A|")


def treewidth_oracle(a: Structure, max_universe: int = DEFAULT_MAX_UNIVERSE) -> int:
    return treewidth_with_order(a, max_universe)[0]


def treewidth_with_order(a: Structure, max_universe: int = DEFAULT_MAX_UNIVERSE) -> tuple[int, list]:
    """Exact treewidth of the Gaifman graph and an optimal elimination order.

    ``TW(S) = min over v in S of max(TW(S - v), |Q(S - v, v)|)`` where
    ``Q(S, v)`` is the set of vertices outside ``S + v`` reachable from ``v``
    through ``S``.  Runs in ``O(2^n n^2)``.
    """
    n = len(a.universe)
    if n > max_universe:
        raise SizeCapExceeded(f"treewidth oracle supports at most {max_universe} elements, got {n}")
    adj = _adjacency(a)
    full = (1 << n) - 1

    def q(s, v):
        # vertices outside s | v reachable from v via paths inside s
        seen = 1 << v
        frontier = 1 << v
        out = 0
        while frontier:
            u = (frontier & -frontier).bit_length() - 1
            frontier &= frontier - 1
            nb = adj[u] & ~seen
            seen |= nb
            out |= nb & ~s
            frontier |= nb & s
        return bin(out & ~(1 << v)).count("1")

    tw = {0: -1}
    choice = {}
    for s in sorted(range(1, full + 1), key=lambda m: bin(m).count("1")):
        best = None
        for v in _bits(s):
            rest = s & ~(1 << v)
            val = max(tw[rest], q(rest, v))
            if best is None or val < best:
                best = val
                choice[s] = v
        tw[s] = best
    order = []
    s = full
    while s:
        v = choice[s]
        order.append(v)
        s &= ~(1 << v)
    order.reverse()
    return max(tw[full], 0), [a.universe[v] for v in order]


def pebble_number(a: Structure, max_universe: int = DEFAULT_MAX_UNIVERSE) -> int:
    """``tw(core(a)) + 1``."""
    return treewidth_oracle(core(a), max_universe) + 1


@dataclass
class WidthReport:
    treewidth: int
    kappa: int
    pi: int
    traversal: KTraversal | None = None
    elimination_order: list = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {
            "treewidth": self.treewidth,
            "kappa": self.kappa,
            "pi": self.pi,
            "elimination_order": [encode_element(x) for x in self.elimination_order],
        }
        if self.traversal is not None:
            u = self.traversal.structure.universe
            idx = {x: i for i, x in enumerate(u)}
            out["traversal"] = {
                "universe": [encode_element(x) for x in u],
                "parent": [None if self.traversal.parent[x] is None else idx[self.traversal.parent[x]] for x in u],
                "labels": [self.traversal.label[x] for x in u],
            }
        return out


def width_report(a: Structure, max_universe: int = DEFAULT_MAX_UNIVERSE) -> WidthReport:
    tw, order = treewidth_with_order(a, max_universe)
    kappa = coalgebra_number(a)
    t = find_k_traversal(a, kappa)
    coalgebra_of_traversal(t)  # validates the witness
    return WidthReport(tw, kappa, pebble_number(a, max_universe), t, order)
