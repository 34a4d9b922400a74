"""Pebble games in positional form.

Two representations of a position are used:

* :class:`Configuration` -- the pebble-indexed partial map ``[k] -> A x B``
  used by plays, transducers and everything that needs to know which pebble
  sits where;
* a *canonical position* -- the relation ``R(gamma)`` as a frozenset of
  ``(a, b)`` pairs.  Winning only depends on ``R(gamma)``, pebbles are
  interchangeable, and equality is preserved (I-structure semantics), so
  canonical positions are partial functions with at most ``k`` pairs.

All fixpoint computations run over canonical positions.  The greatest
fixpoint of the one-move extension condition is downward closed, so it is
computed in the equivalent "closed under restriction + extendable while
fewer than ``k`` pebbles are down" form, which admits support counters.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass

from .errors import LawViolation, PebblingError, SizeCapExceeded
from .structures import Structure, find_homomorphism, require_same_signature

DEFAULT_MAX_STATES = 200_000


class Configuration(Mapping):
    """Immutable partial map from pebble index to a ``(source, target)`` pair."""

    __slots__ = ("_map", "_hash")

    def __init__(self, items: Mapping | Iterable = ()):
        self._map = dict(items)
        self._hash = None

    def __getitem__(self, p):
        return self._map[p]

    def __iter__(self):
        return iter(sorted(self._map))

    def __len__(self):
        return len(self._map)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._map.items()))
        return self._hash

    def __eq__(self, other):
        if isinstance(other, Configuration):
            return self._map == other._map
        return NotImplemented

    def __repr__(self):
        inner = ", ".join(f"{p}: {self._map[p]!r}" for p in self)
        return f"Configuration({{{inner}}})"

    def relation(self) -> frozenset:
        """``R(gamma)``: the set of pebbled pairs."""
        return frozenset(self._map.values())


EMPTY = Configuration()


def update(g: Configuration, p: int, a, b, k: int | None = None) -> Configuration:
    """``gamma[p -> (a, b)]``: move (or first place) pebble ``p``."""
    if not isinstance(p, int) or p < 1 or (k is not None and p > k):
        raise PebblingError(f"pebble index {p!r} out of range 1..{k if k is not None else 'k'}")
    items = dict(g._map) if isinstance(g, Configuration) else dict(g)
    items[p] = (a, b)
    return Configuration(items)


def canonical(g) -> frozenset:
    if isinstance(g, Configuration):
        return g.relation()
    return frozenset(g)


def is_partial_homomorphism(pairs, a: Structure, b: Structure) -> bool:
    rel = {}
    for x, y in pairs:
        if rel.setdefault(x, y) != y:
            return False
    for name, t in a.tuples():
        if all(x in rel for x in t) and tuple(rel[x] for x in t) not in b.relations[name]:
            return False
    return True


def is_partial_isomorphism(pairs, a: Structure, b: Structure) -> bool:
    pairs = list(pairs)
    return is_partial_homomorphism(pairs, a, b) and is_partial_homomorphism(
        [(y, x) for x, y in pairs], b, a
    )


def is_winning(g, a: Structure, b: Structure) -> bool:
    """``R(gamma)`` is a single-valued partial homomorphism ``a -> b``."""
    return is_partial_homomorphism(canonical(g), a, b)


# -- the fixpoint engine ---------------------------------------------------

UNSET = -1


class _Arena:
    """Index-level view of a pair of structures for the fixpoint loops.

    A position is a tuple of length ``|A|`` holding the index of the image
    in ``B`` or ``UNSET``.
    """

    def __init__(self, a: Structure, b: Structure, iso: bool):
        require_same_signature(a, b)
        self.a, self.b, self.iso = a, b, iso
        self.n, self.m = len(a.universe), len(b.universe)
        self.facts_a = self._facts(a)
        self.rel_b = {name: {tuple(b.index(x) for x in t) for t in ts} for name, ts in b.relations.items()}
        if iso:
            self.facts_b = self._facts(b)
            self.rel_a = {name: {tuple(a.index(x) for x in t) for t in ts} for name, ts in a.relations.items()}

    @staticmethod
    def _facts(s: Structure):
        facts = [[] for _ in s.universe]
        for name, t in s.tuples():
            it = tuple(s.index(x) for x in t)
            for i in set(it):
                facts[i].append((name, it))
        return facts

    def can_extend(self, conf, i, j) -> bool:
        """Would adding ``i -> j`` to ``conf`` keep it allowed?"""
        for name, t in self.facts_a[i]:
            img = []
            for x in t:
                y = j if x == i else conf[x]
                if y == UNSET:
                    break
                img.append(y)
            else:
                if tuple(img) not in self.rel_b[name]:
                    return False
        if self.iso:
            inv = {y: x for x, y in enumerate(conf) if y != UNSET}
            if j in inv:
                return False
            inv[j] = i
            for name, u in self.facts_b[j]:
                pre = []
                for y in u:
                    x = inv.get(y)
                    if x is None:
                        break
                    pre.append(x)
                else:
                    if tuple(pre) not in self.rel_a[name]:
                        return False
        return True

    def positions(self, k: int) -> dict:
        """All allowed positions with at most ``k`` pairs, mapped to their size."""
        out = {}
        conf = [UNSET] * self.n

        def dfs(i, size):
            if i == self.n:
                out[tuple(conf)] = size
                return
            dfs(i + 1, size)
            if size < k:
                for j in range(self.m):
                    if self.can_extend(conf, i, j):
                        conf[i] = j
                        dfs(i + 1, size + 1)
                        conf[i] = UNSET

        dfs(0, 0)
        return out

    def to_pairs(self, conf) -> frozenset:
        return frozenset(
            (self.a.universe[i], self.b.universe[j]) for i, j in enumerate(conf) if j != UNSET
        )


def _with(conf, i, j):
    return conf[:i] + (j,) + conf[i + 1 :]


def _children(conf):
    for i, v in enumerate(conf):
        if v == UNSET:
            yield i


def _solve_counting(arena: _Arena, k: int, back: bool) -> dict:
    """Greatest fixpoint for the existential (``back=False``) or
    back-and-forth (``back=True``) game; returns the surviving positions."""
    S = arena.positions(k)
    m = arena.m
    forth_support = {}
    back_support = {}
    dead = []
    for conf, size in S.items():
        if size >= k:
            continue
        used = {v for v in conf if v != UNSET}
        counts_b = dict.fromkeys((j for j in range(m) if j not in used), 0) if back else None
        for i in _children(conf):
            c = 0
            for j in range(m):
                if _with(conf, i, j) in S:
                    c += 1
                    if back:
                        counts_b[j] += 1
            forth_support[conf, i] = c
            if c == 0:
                dead.append(conf)
        if back:
            for j, c in counts_b.items():
                back_support[conf, j] = c
                if c == 0:
                    dead.append(conf)

    while dead:
        conf = dead.pop()
        size = S.pop(conf, None)
        if size is None:
            continue
        for i, v in enumerate(conf):
            if v == UNSET:
                continue
            parent = _with(conf, i, UNSET)
            if parent in S:
                forth_support[parent, i] -= 1
                if forth_support[parent, i] == 0:
                    dead.append(parent)
                if back:
                    back_support[parent, v] -= 1
                    if back_support[parent, v] == 0:
                        dead.append(parent)
        if size < k:
            for i in _children(conf):
                for j in range(m):
                    child = _with(conf, i, j)
                    if child in S:
                        dead.append(child)
    return S


def _perfect_matching(left, right, edges) -> bool:
    """Kuhn's augmenting paths; ``edges[i]`` lists admissible ``j``."""
    if len(left) != len(right):
        return False
    match = {}

    def augment(i, seen):
        for j in edges[i]:
            if j in seen:
                continue
            seen.add(j)
            if j not in match or augment(match[j], seen):
                match[j] = i
                return True
        return False

    return all(augment(i, set()) for i in left)


def _solve_bijective(arena: _Arena, k: int) -> dict:
    S = arena.positions(k)
    m = arena.m

    def good(conf) -> bool:
        for i, v in enumerate(conf):
            if v != UNSET and _with(conf, i, UNSET) not in S:
                return False
        if S[conf] >= k:
            return True
        used = {v for v in conf if v != UNSET}
        left = list(_children(conf))
        right = [j for j in range(m) if j not in used]
        edges = {i: [j for j in right if _with(conf, i, j) in S] for i in left}
        return _perfect_matching(left, right, edges)

    queue = deque(S)
    queued = set(S)
    while queue:
        conf = queue.popleft()
        queued.discard(conf)
        if conf not in S or good(conf):
            continue
        del S[conf]
        neighbours = [_with(conf, i, UNSET) for i, v in enumerate(conf) if v != UNSET]
        neighbours += [_with(conf, i, j) for i in _children(conf) for j in range(m)]
        for other in neighbours:
            if other in S and other not in queued:
                queue.append(other)
                queued.add(other)
    return S


def _reachable(S: dict, empty, m: int) -> set:
    """Positions reachable from the empty one by placing pebbles one at a time."""
    seen = {empty}
    queue = deque([empty])
    while queue:
        conf = queue.popleft()
        for i in _children(conf):
            for j in range(m):
                child = _with(conf, i, j)
                if child in S and child not in seen:
                    seen.add(child)
                    queue.append(child)
    return seen


# -- strategies ------------------------------------------------------------


@dataclass(frozen=True)
class PositionalStrategy:
    """A set of canonical positions for the game from ``source`` to ``target``."""

    source: Structure
    target: Structure
    k: int
    positions: frozenset

    def __contains__(self, g) -> bool:
        return canonical(g) in self.positions

    def __len__(self):
        return len(self.positions)

    def successors(self, position: frozenset) -> Iterator[tuple]:
        """Every Spoiler move from ``position`` with Duplicator's surviving answers.

        Yields ``(vacated, a, answers)``: ``vacated`` is the source element the
        moved pebble leaves (``None`` for a fresh pebble) and ``answers`` the
        ``(b, next_position)`` pairs inside the strategy.
        """
        rel = dict(position)
        bases = [(None, position)] if len(position) < self.k else []
        bases += [(c, position - {(c, rel[c])}) for c in sorted(rel, key=self.source.index)]
        for vacated, base in bases:
            base_map = dict(base)
            for a in self.source.universe:
                if a in base_map:
                    answers = [(base_map[a], base)] if base in self.positions else []
                else:
                    answers = [
                        (b, base | {(a, b)})
                        for b in self.target.universe
                        if base | {(a, b)} in self.positions
                    ]
                yield vacated, a, answers

    def violations(self) -> list[str]:
        """Check (S0) empty position, (S1) extendability, (S2) reachability, winning."""
        problems = []
        empty = frozenset()
        if empty not in self.positions:
            problems.append("S0: empty position missing")
        for pos in sorted(self.positions, key=_position_key(self.source, self.target)):
            if not is_partial_homomorphism(pos, self.source, self.target):
                problems.append(f"winning: {sorted(pos, key=repr)} is not a partial homomorphism")
            if len(pos) > self.k:
                problems.append(f"position {sorted(pos, key=repr)} uses more than k={self.k} pebbles")
            for vacated, a, answers in self.successors(pos):
                if not answers:
                    problems.append(
                        f"S1: no answer to pebble on {a!r} (vacating {vacated!r}) from {sorted(pos, key=repr)}"
                    )
                    break
        if empty in self.positions:
            seen = {empty}
            queue = deque([empty])
            while queue:
                pos = queue.popleft()
                for _, _, answers in self.successors(pos):
                    for _, nxt in answers:
                        if nxt not in seen:
                            seen.add(nxt)
                            queue.append(nxt)
            unreachable = self.positions - seen
            if unreachable:
                problems.append(f"S2: {len(unreachable)} positions unreachable from the empty position")
        return problems


def _position_key(a: Structure, b: Structure):
    def key(pos):
        return (len(pos), sorted((a.index(x), b.index(y)) for x, y in pos))

    return key


def _check_k(k):
    if not isinstance(k, int) or k < 1:
        raise PebblingError(f"k must be a positive integer, got {k!r}")


def _largest(a: Structure, b: Structure, k: int, game: str):
    _check_k(k)
    if game == "existential":
        arena = _Arena(a, b, iso=False)
        S = _solve_counting(arena, k, back=False)
    elif game == "back-and-forth":
        arena = _Arena(a, b, iso=True)
        S = _solve_counting(arena, k, back=True)
    elif game == "bijective":
        arena = _Arena(a, b, iso=True)
        S = _solve_bijective(arena, k)
    else:
        raise PebblingError(f"unknown game {game!r}")
    empty = (UNSET,) * arena.n
    if empty not in S:
        return arena, None
    return arena, _reachable(S, empty, arena.m)


def existential_strategy(a: Structure, b: Structure, k: int) -> PositionalStrategy | None:
    """Largest winning positional strategy for Duplicator, or ``None``.

    Start from every canonical position that is a partial homomorphism and
    delete positions that cannot answer some Spoiler move until nothing
    changes; keep what is reachable from the empty position.
    """
    arena, S = _largest(a, b, k, "existential")
    if S is None:
        return None
    return PositionalStrategy(a, b, k, frozenset(arena.to_pairs(c) for c in S))


def arrow_k(a: Structure, b: Structure, k: int) -> bool:
    """Duplicator wins the existential ``k``-pebble game from ``a`` to ``b``."""
    return _largest(a, b, k, "existential")[1] is not None


def consistency_number(a: Structure, b: Structure) -> int:
    """Largest ``k <= |a|`` with ``arrow_k(a, b, k)``; 0 if none."""
    require_same_signature(a, b)
    for k in range(len(a.universe), 0, -1):
        if arrow_k(a, b, k):
            return k
    return 0


def back_and_forth_strategy(a: Structure, b: Structure, k: int) -> PositionalStrategy | None:
    """Largest set of partial isomorphisms with both forth and back extension."""
    arena, S = _largest(a, b, k, "back-and-forth")
    if S is None:
        return None
    return PositionalStrategy(a, b, k, frozenset(arena.to_pairs(c) for c in S))


def back_and_forth_equiv(a: Structure, b: Structure, k: int) -> bool:
    """Equivalence in the symmetric ``k``-pebble game (full ``k``-variable logic)."""
    return _largest(a, b, k, "back-and-forth")[1] is not None


def bijection_game_equiv(a: Structure, b: Structure, k: int) -> bool:
    """Duplicator wins the ``k``-pebble bijection game (counting logic)."""
    require_same_signature(a, b)
    _check_k(k)
    if len(a.universe) != len(b.universe):
        return False
    return _largest(a, b, k, "bijective")[1] is not None


def strategy_from_homomorphism(h: Mapping, a: Structure, b: Structure, k: int) -> PositionalStrategy:
    """All positions whose pairs lie on the graph of ``h``."""
    _check_k(k)
    graph = [(x, h[x]) for x in a.universe]
    positions = {frozenset()}
    frontier = {frozenset()}
    for _ in range(min(k, len(graph))):
        frontier = {pos | {pair} for pos in frontier for pair in graph if pair not in pos}
        positions |= frontier
    return PositionalStrategy(a, b, k, frozenset(positions))


def identity_strategy(a: Structure, k: int) -> PositionalStrategy:
    return strategy_from_homomorphism({x: x for x in a.universe}, a, a, k)


def homomorphism_strategy(a: Structure, b: Structure, k: int) -> PositionalStrategy | None:
    h = find_homomorphism(a, b)
    return None if h is None else strategy_from_homomorphism(h, a, b, k)


# -- determinization and transducers ---------------------------------------


class Transducer:
    """Deterministic finite-state strategy.

    States are pebble-indexed configurations whose relation lies in the
    strategy; on input ``(p, a)`` the output is the least target element
    (in ``target``'s universe order) keeping the next relation inside the
    strategy.  Transitions are computed on demand and cached.
    """

    def __init__(self, strategy: PositionalStrategy):
        self.strategy = strategy
        self.k = strategy.k
        self.source = strategy.source
        self.target = strategy.target
        self._delta: dict = {}

    def step(self, state: Configuration, p: int, a) -> tuple:
        key = (state, p, a)
        hit = self._delta.get(key)
        if hit is not None:
            return hit
        if not isinstance(p, int) or not 1 <= p <= self.k:
            raise PebblingError(f"pebble index {p!r} out of range 1..{self.k}")
        if a not in self.source:
            raise PebblingError(f"{a!r} is not an element of the source structure")
        for b in self.target.universe:
            nxt = update(state, p, a, b)
            if nxt.relation() in self.strategy.positions:
                self._delta[key] = (b, nxt)
                return b, nxt
        raise LawViolation(f"strategy has no answer to ({p}, {a!r}) from {state!r}")

    def explore(self, max_states: int = DEFAULT_MAX_STATES) -> tuple[list, dict]:
        """Materialize the reachable states and the transition table."""
        states = [EMPTY]
        index = {EMPTY: 0}
        delta = {}
        queue = deque([EMPTY])
        while queue:
            state = queue.popleft()
            for p in range(1, self.k + 1):
                for a in self.source.universe:
                    b, nxt = self.step(state, p, a)
                    if nxt not in index:
                        if len(states) >= max_states:
                            raise SizeCapExceeded(f"transducer exceeds {max_states} states")
                        index[nxt] = len(states)
                        states.append(nxt)
                        queue.append(nxt)
                    delta[index[state], p, a] = (b, index[nxt])
        return states, delta

    def to_dict(self, max_states: int = DEFAULT_MAX_STATES) -> dict:
        from .structures import encode_element as enc

        states, delta = self.explore(max_states)
        return {
            "k": self.k,
            "states": [{str(p): [enc(s[p][0]), enc(s[p][1])] for p in s} for s in states],
            "initial": 0,
            "delta": [[i, p, enc(a), enc(b), j] for (i, p, a), (b, j) in delta.items()],
        }


def determinize(strategy: PositionalStrategy, explore: bool = True, max_states: int = DEFAULT_MAX_STATES) -> Transducer:
    """Least-answer deterministic sub-strategy.

    With ``explore`` the reachable closure is built eagerly (and capped);
    otherwise transitions are produced lazily as plays are run.
    """
    t = Transducer(strategy)
    if explore:
        t.explore(max_states)
    return t


def realize(t: Transducer, play) -> tuple:
    """Run ``t`` along a Spoiler play and return Duplicator's answering play."""
    state = EMPTY
    out = []
    for p, a in play:
        b, state = t.step(state, p, a)
        out.append((p, b))
    return tuple(out)


def final_configuration(t: Transducer, play) -> Configuration:
    state = EMPTY
    for p, a in play:
        _, state = t.step(state, p, a)
    return state
