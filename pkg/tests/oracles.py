"""Independent oracles used only by the tests.

These deliberately share no code with the package beyond the Structure
type: the game solvers work on pebble-indexed configurations (not the
canonical element maps the library uses), and the width oracles brute-force
elimination orders and forests.
"""

from functools import lru_cache
from itertools import permutations, product

import numpy as np


def _edge_matrix(s):
    (name,) = s.signature.names
    n = len(s.universe)
    idx = {x: i for i, x in enumerate(s.universe)}
    m = np.zeros((n + 1, n + 1), dtype=bool)  # last row/col: unset sentinel
    for x, y in s.relations[name]:
        m[idx[x], idx[y]] = True
    return m


@lru_cache(maxsize=None)
def _arena(n, m, k):
    """Pebble-indexed configurations for |A| = n, |B| = m, k pebbles.

    Each pebble holds a pair index ``a * m + b`` or ``n * m`` when unset;
    a configuration is the base-``(n*m + 1)`` number of its pebble slots.
    Returns ``(pa, pb, nxt)`` where ``pa[c, p]`` / ``pb[c, p]`` are the
    elements under pebble ``p`` (``n`` / ``m`` when unset) and
    ``nxt[c, p, a, b]`` is the configuration after moving pebble ``p`` to
    ``(a, b)``.
    """
    base = n * m + 1
    total = base**k
    codes = np.arange(total)
    slots = np.stack([(codes // base**p) % base for p in range(k)], axis=1)
    unset = slots == n * m
    pa = np.where(unset, n, slots // m)
    pb = np.where(unset, m, slots % m)
    nxt = np.empty((total, k, n, m), dtype=np.int64)
    for p in range(k):
        without = codes - slots[:, p] * base**p
        for a in range(n):
            for b in range(m):
                nxt[:, p, a, b] = without + (a * m + b) * base**p
    return pa, pb, nxt


def _winning(a, b, k, iso):
    n, m = len(a.universe), len(b.universe)
    pa, pb, _ = _arena(n, m, k)
    ea, eb = _edge_matrix(a), _edge_matrix(b)
    ok = np.ones(len(pa), dtype=bool)
    for p in range(k):
        for q in range(k):
            both = (pa[:, p] < n) & (pa[:, q] < n)
            same_a = pa[:, p] == pa[:, q]
            same_b = pb[:, p] == pb[:, q]
            ok &= ~both | ~same_a | same_b
            ok &= ~both | ~ea[pa[:, p], pa[:, q]] | eb[pb[:, p], pb[:, q]]
            if iso:
                ok &= ~both | ~same_b | same_a
                ok &= ~both | ~eb[pb[:, p], pb[:, q]] | ea[pa[:, p], pa[:, q]]
    return ok


def _fixpoint(alive, step):
    while True:
        new = alive & step(alive)
        if (new == alive).all():
            return alive
        alive = new


def existential_game(a, b, k, rounds=None):
    """Duplicator wins the existential k-pebble game (forth only).

    With ``rounds`` set, the game lasts that many moves instead of forever.
    """
    n, m = len(a.universe), len(b.universe)
    _, _, nxt = _arena(n, m, k)
    alive = _winning(a, b, k, iso=False)

    def step(w):
        return w[nxt].any(axis=3).all(axis=(1, 2))

    if rounds is None:
        alive = _fixpoint(alive, step)
    else:
        for _ in range(rounds):
            alive = alive & step(alive)
    return bool(alive[_empty(n, m, k)])


def back_and_forth_game(a, b, k):
    n, m = len(a.universe), len(b.universe)
    _, _, nxt = _arena(n, m, k)

    def step(w):
        moves = w[nxt]
        return moves.any(axis=3).all(axis=(1, 2)) & moves.any(axis=2).all(axis=(1, 2))

    return bool(_fixpoint(_winning(a, b, k, iso=True), step)[_empty(n, m, k)])


def bijection_game(a, b, k):
    n, m = len(a.universe), len(b.universe)
    if n != m:
        return False
    _, _, nxt = _arena(n, m, k)
    perms = np.array(list(permutations(range(n))))
    rows = np.arange(n)

    def step(w):
        moves = w[nxt]  # (c, p, a, b)
        # for each permutation h: all a of moves[c, p, a, h[a]]
        per = np.stack([moves[:, :, rows, h].all(axis=2) for h in perms], axis=2)
        return per.any(axis=2).all(axis=1)

    return bool(_fixpoint(_winning(a, b, k, iso=True), step)[_empty(n, m, k)])


def _empty(n, m, k):
    base = n * m + 1
    return sum((n * m) * base**p for p in range(k))


# -- width -------------------------------------------------------------------


def _adjacency(s):
    adj = {x: set() for x in s.universe}
    for _, t in s.tuples():
        for x in t:
            for y in t:
                if x != y:
                    adj[x].add(y)
    return adj


def treewidth_by_orders(s):
    """Minimum over all elimination orders of the largest back-degree."""
    adj0 = _adjacency(s)
    if not adj0:
        return 0
    best = len(adj0)
    for order in permutations(s.universe):
        adj = {x: set(v) for x, v in adj0.items()}
        w = 0
        for x in order:
            nb = adj.pop(x)
            w = max(w, len(nb))
            for y in nb:
                adj[y] |= nb - {y}
                adj[y].discard(x)
            if w >= best:
                break
        best = min(best, w)
    return best


def all_forests(universe):
    """Every parent map on ``universe`` without cycles."""
    u = list(universe)
    for choice in product([None] + u, repeat=len(u)):
        parent = dict(zip(u, choice))
        ok = True
        for x in u:
            seen = set()
            y = x
            while y is not None:
                if y in seen:
                    ok = False
                    break
                seen.add(y)
                y = parent[y]
            if not ok:
                break
        if ok:
            yield parent


def traversal_ok(s, k, parent, label):
    """Definition check written directly from the traversal conditions."""

    def below(x, y):  # x <= y in the forest order
        while y is not None:
            if y == x:
                return True
            y = parent[y]
        return False

    adj = _adjacency(s)
    for x in s.universe:
        for y in adj[x]:
            if below(y, x):
                lo, hi = y, x
            elif below(x, y):
                lo, hi = x, y
            else:
                return False
            c = hi
            while c != lo:
                if label[c] == label[lo]:
                    return False
                c = parent[c]
    return all(1 <= label[x] <= k for x in s.universe)


def all_traversals(s, k):
    u = list(s.universe)
    for parent in all_forests(u):
        for labels in product(range(1, k + 1), repeat=len(u)):
            label = dict(zip(u, labels))
            if traversal_ok(s, k, parent, label):
                yield parent, label
