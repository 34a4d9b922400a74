"""The pebbling comonad on depth-bounded fragments.

A play is a non-empty tuple of moves ``(pebble, element)``.  Plays over
plays (the output of :func:`comult`) are tuples of ``(pebble, play)``.
``T_k A`` itself is infinite; :func:`tk_bounded` materializes the plays up to
a caller-chosen length as an ordinary :class:`Structure`.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field
from itertools import product

from .errors import LawViolation, PebblingError, SizeCapExceeded
from .games import Configuration
from .structures import Structure, gaifman, iter_homomorphisms

DEFAULT_MAX_PLAYS = 200_000

Play = tuple


def check_play(s, k: int | None = None) -> Play:
    s = tuple(s)
    if not s:
        raise PebblingError("a play must contain at least one move")
    for move in s:
        if len(move) != 2 or not isinstance(move[0], int) or move[0] < 1:
            raise PebblingError(f"malformed move {move!r}")
        if k is not None and move[0] > k:
            raise PebblingError(f"pebble {move[0]} exceeds k={k}")
    return s


def counit(s: Play):
    """The element of the last move."""
    return s[-1][1]


def prefixes(s: Play) -> list[Play]:
    return [s[: i + 1] for i in range(len(s))]


def comult(s: Play) -> Play:
    """``[(p1, s1), ..., (pn, sn)]`` where ``si`` is the i-th prefix."""
    return tuple((p, s[: i + 1]) for i, (p, _) in enumerate(s))


def lift(f, s: Play) -> Play:
    """Functor action: apply ``f`` to every element, keeping pebbles."""
    f = _as_callable(f)
    return tuple((p, f(a)) for p, a in s)


def coextend(f, s: Play) -> Play:
    """Kleisli coextension ``f*``: ``[(p_i, f(s_i))]`` over the prefixes of ``s``."""
    if isinstance(f, Mapping):
        missing = [t for t in prefixes(s) if t not in f]
        if missing:
            raise PebblingError(f"play of length {len(s)} exceeds the domain of f")
    f = _as_callable(f)
    return tuple((p, f(s[: i + 1])) for i, (p, _) in enumerate(s))


def cokleisli_compose(f, g):
    """``g . f`` in the co-Kleisli category: ``g . T(f) . delta``."""
    f, g = _as_callable(f), _as_callable(g)
    return lambda s: g(coextend(f, s))


def include(l: int, k: int, s: Play) -> Play:
    """Inclusion of ``T_l A`` into ``T_k A`` for ``l <= k``."""
    if l > k:
        raise PebblingError(f"cannot include T_{l} into T_{k}: l > k")
    for p, _ in s:
        if p > l:
            raise PebblingError(f"pebble {p} exceeds l={l}")
    return tuple(s)


def _as_callable(f) -> Callable:
    if isinstance(f, Mapping):
        return f.__getitem__
    return f


def is_prefix(s: Play, t: Play) -> bool:
    return len(s) <= len(t) and t[: len(s)] == s


def is_active(s: Play, t: Play) -> bool:
    """``s`` is a prefix of ``t`` whose last pebble is not reused afterwards."""
    if not is_prefix(s, t):
        return False
    p = s[-1][0]
    return all(q != p for q, _ in t[len(s) :])


def active_prefixes(t: Play) -> list[Play]:
    out = []
    seen = set()
    for i in range(len(t) - 1, -1, -1):
        p = t[i][0]
        if p not in seen:
            out.append(t[: i + 1])
            seen.add(p)
    out.reverse()
    return out


def tk_holds(base: Structure, name: str, plays) -> bool:
    """Does relation ``name`` of ``T_k base`` hold of ``plays``?

    The plays must form a chain under prefix order, each must be active in
    the greatest one, and the base relation must hold of their last elements.
    """
    plays = tuple(plays)
    top = max(plays, key=len)
    for s in plays:
        if not is_active(s, top):
            return False
    return tuple(counit(s) for s in plays) in base.relations[name]


@dataclass(frozen=True)
class BoundedTk:
    """Plays of length at most ``depth`` over ``base`` as a structure."""

    base: Structure
    k: int
    depth: int
    structure: Structure = field(repr=False)

    @property
    def universe(self):
        return self.structure.universe

    def holds(self, name: str, plays) -> bool:
        return tk_holds(self.base, name, plays)


def count_plays(n: int, k: int, depth: int) -> int:
    w = n * k
    return sum(w**i for i in range(1, depth + 1))


def enumerate_plays(base: Structure, k: int, depth: int) -> list[Play]:
    """All plays of length ``1..depth``, ordered by length then lexicographically."""
    moves = [(p, a) for p in range(1, k + 1) for a in base.universe]
    out = []
    layer = [()]
    for _ in range(depth):
        layer = [s + (m,) for s in layer for m in moves]
        out.extend(layer)
    return out


def tk_bounded(base: Structure, k: int, depth: int, max_plays: int = DEFAULT_MAX_PLAYS) -> BoundedTk:
    """Materialize ``T_k base`` restricted to plays of length ``<= depth``."""
    if k < 1 or depth < 1:
        raise PebblingError("k and depth must be >= 1")
    size = count_plays(len(base.universe), k, depth)
    if size > max_plays:
        raise SizeCapExceeded(f"T_{k} fragment of depth {depth} has {size} plays (cap {max_plays})")
    moves = [(p, a) for p in range(1, k + 1) for a in base.universe]
    sig = list(base.signature)
    rels = {name: set() for name, _ in sig}
    plays = []
    # each layer entry: (play, its active prefixes other than itself)
    layer = [((), ())]
    for _ in range(depth):
        nxt = []
        for s, act in layer:
            for m in moves:
                t = s + (m,)
                others = tuple(u for u in act if u[-1][0] != m[0])
                plays.append(t)
                nxt.append((t, others + (t,)))
                _add_tuples(rels, sig, base, t, others)
        layer = nxt
    return BoundedTk(base, k, depth, Structure(base.signature, plays, rels))


def _add_tuples(rels, sig, base, t, others):
    """Add every tuple of active prefixes of ``t`` that mentions ``t``."""
    act = others + (t,)
    for name, arity in sig:
        target = base.relations[name]
        if not target:
            continue
        for combo in product(act, repeat=arity):
            if t in combo and tuple(u[-1][1] for u in combo) in target:
                rels[name].add(combo)


# -- comonad laws ----------------------------------------------------------


@dataclass
class LawReport:
    passed: bool
    checked: int
    counterexample: tuple | None = None  # (law, play, detail)

    def __bool__(self):
        return self.passed


def sample_homomorphisms(a: Structure, limit: int = 6) -> list[dict]:
    """A few endomorphisms of ``a``: the identity first, then canonical order."""
    out = [{x: x for x in a.universe}]
    for h in iter_homomorphisms(a, a):
        if h not in out:
            out.append(h)
        if len(out) >= limit:
            break
    return out


def check_comonad_laws(
    a: Structure,
    k: int,
    depth: int,
    *,
    comult: Callable = comult,
    counit: Callable = counit,
    homs: Iterable[Mapping] | None = None,
    max_plays: int = DEFAULT_MAX_PLAYS,
) -> LawReport:
    """Check the comonad laws on every play of length ``<= depth``.

    Laws: both counit laws, coassociativity, naturality of counit and
    comultiplication for sampled endomorphisms, and that counit and
    comultiplication are homomorphisms of the bounded structures.  The
    ``comult`` / ``counit`` hooks exist so mutated operations can be fed in.
    """
    tk = tk_bounded(a, k, depth, max_plays)
    homs = list(homs) if homs is not None else sample_homomorphisms(a)
    checked = 0

    def fail(law, s, detail=""):
        return LawReport(False, checked, (law, s, detail))

    for s in tk.universe:
        try:
            d = comult(s)
            if counit(d) != s:
                return fail("counit . comult = id", s)
            if lift(counit, d) != s:
                return fail("T(counit) . comult = id", s)
            if lift(comult, d) != comult(d):
                return fail("coassociativity", s)
            for h in homs:
                if h[counit(s)] != counit(lift(h, s)):
                    return fail("naturality of counit", s, repr(h))
                if lift(lambda u: lift(h, u), d) != comult(lift(h, s)):
                    return fail("naturality of comult", s, repr(h))
        except (IndexError, KeyError, TypeError, ValueError) as exc:
            return fail("evaluation error", s, repr(exc))
        checked += 1

    for name, t in tk.structure.tuples():
        try:
            if tuple(counit(s) for s in t) not in a.relations[name]:
                return fail("counit is a homomorphism", t)
            if not tk_holds(tk.structure, name, [comult(s) for s in t]):
                return fail("comult is a homomorphism", t)
        except (IndexError, KeyError, TypeError, ValueError) as exc:
            return fail("evaluation error", t, repr(exc))
        checked += 1
    return LawReport(True, checked)


# -- traversals and coalgebras ---------------------------------------------


@dataclass(frozen=True)
class KTraversal:
    """A forest order (as a parent map) plus a pebble labelling.

    ``parent[x]`` is the immediate predecessor of ``x`` or ``None`` for roots.
    """

    structure: Structure
    k: int
    parent: Mapping
    label: Mapping

    def ancestors(self, x) -> list:
        """Strict predecessors of ``x``, nearest first."""
        out = []
        seen = {x}
        y = self.parent[x]
        while y is not None:
            if y in seen:
                raise LawViolation(f"parent map has a cycle through {y!r}")
            seen.add(y)
            out.append(y)
            y = self.parent[y]
        return out

    def leq(self, x, y) -> bool:
        return x == y or x in self.ancestors(y)

    def violations(self) -> list[str]:
        s = self.structure
        problems = []
        if set(self.parent) != set(s.universe) or set(self.label) != set(s.universe):
            return ["parent and label maps must cover exactly the universe"]
        for x in s.universe:
            if self.parent[x] is not None and self.parent[x] not in s:
                problems.append(f"parent of {x!r} is not an element")
            if not (isinstance(self.label[x], int) and 1 <= self.label[x] <= self.k):
                problems.append(f"label of {x!r} is not in 1..{self.k}")
        if problems:
            return problems
        try:
            for x in s.universe:
                self.ancestors(x)
        except LawViolation as exc:
            return [str(exc)]
        for x, y in gaifman(s).edges():
            if self.leq(y, x):
                x, y = y, x
            if not self.leq(x, y):
                problems.append(f"adjacent {x!r} and {y!r} are incomparable")
                continue
            # every c with x < c <= y must carry a label different from x's
            c = y
            while c != x:
                if self.label[c] == self.label[x]:
                    problems.append(f"label {self.label[x]} of {x!r} reused at {c!r} below adjacent {y!r}")
                    break
                c = self.parent[c]
        return problems

    def to_dict(self) -> dict:
        from .structures import encode_element as enc

        return {
            "k": self.k,
            "parent": {enc(x): (None if self.parent[x] is None else enc(self.parent[x])) for x in self.structure.universe},
            "label": {enc(x): self.label[x] for x in self.structure.universe},
        }


class Coalgebra:
    """A map ``alpha: A -> T_k A`` satisfying the coalgebra laws.

    Construction validates the counit law, the comultiplication law and the
    homomorphism condition, raising :class:`LawViolation` on failure.
    """

    def __init__(self, structure: Structure, k: int, alpha: Mapping):
        self.structure = structure
        self.k = k
        self.alpha = {x: tuple(alpha[x]) for x in structure.universe} if set(alpha) >= set(structure.universe) else None
        if self.alpha is None:
            raise LawViolation("alpha must be defined on every element")
        problems = self.violations()
        if problems:
            raise LawViolation("; ".join(problems))

    def __getitem__(self, x) -> Play:
        return self.alpha[x]

    def violations(self) -> list[str]:
        problems = []
        for x, s in self.alpha.items():
            try:
                check_play(s, self.k)
            except PebblingError as exc:
                problems.append(f"alpha({x!r}): {exc}")
                continue
            if counit(s) != x:
                problems.append(f"counit law: alpha({x!r}) ends in {counit(s)!r}")
            for i, (_, y) in enumerate(s):
                if self.alpha.get(y) != s[: i + 1]:
                    problems.append(f"comultiplication law: alpha({y!r}) is not prefix {i + 1} of alpha({x!r})")
                    break
        if problems:
            return problems
        for name, t in self.structure.tuples():
            if not tk_holds(self.structure, name, [self.alpha[x] for x in t]):
                problems.append(f"not a homomorphism: {name}{t!r}")
        return problems

    def depth(self) -> int:
        return max(len(s) for s in self.alpha.values())


def coalgebra_of_traversal(t: KTraversal) -> Coalgebra:
    """``alpha(a) = alpha(parent(a)) + [(label(a), a)]`` (roots start empty)."""
    problems = t.violations()
    if problems:
        raise LawViolation("; ".join(problems))
    alpha = {}

    def build(x):
        if x not in alpha:
            p = t.parent[x]
            alpha[x] = (build(p) if p is not None else ()) + ((t.label[x], x),)
        return alpha[x]

    for x in t.structure.universe:
        build(x)
    return Coalgebra(t.structure, t.k, alpha)


def traversal_of_coalgebra(al: Coalgebra) -> KTraversal:
    """Order by prefix of images; label by the last pebble of the image."""
    problems = al.violations()
    if problems:
        raise LawViolation("; ".join(problems))
    parent = {}
    label = {}
    for x, s in al.alpha.items():
        label[x] = s[-1][0]
        parent[x] = s[-2][1] if len(s) > 1 else None
    t = KTraversal(al.structure, al.k, parent, label)
    problems = t.violations()
    if problems:
        raise LawViolation("; ".join(problems))
    return t


def linear_traversal(a: Structure) -> KTraversal:
    """The chain ``a1 < ... < an`` labelled ``1..n``."""
    u = a.universe
    parent = {x: (u[i - 1] if i else None) for i, x in enumerate(u)}
    label = {x: i + 1 for i, x in enumerate(u)}
    return KTraversal(a, len(u), parent, label)


# -- tree decomposition of T_k A --------------------------------------------


@dataclass
class TreeDecomposition:
    """Nodes are plays plus the empty root; a node's parent is its prefix."""

    bags: dict  # node -> frozenset of plays

    def parent(self, node):
        return node[:-1] if node else None

    def width(self) -> int:
        return max((len(b) for b in self.bags.values()), default=0) - 1

    def validate(self, tk: BoundedTk) -> dict:
        nodes = self.bags
        uncovered = [
            (name, t)
            for name, t in tk.structure.tuples()
            if not set(t) <= nodes.get(max(t, key=len), frozenset())
        ]
        occurrence_roots = {}
        for node, bag in nodes.items():
            for x in bag:
                par = self.parent(node)
                if par is None or x not in nodes.get(par, frozenset()):
                    occurrence_roots[x] = occurrence_roots.get(x, 0) + 1
        disconnected = [x for x, c in occurrence_roots.items() if c != 1]
        missing = [x for x in tk.universe if x not in occurrence_roots]
        max_bag = self.width() + 1
        return {
            "max_bag": max_bag,
            "width": max_bag - 1,
            "bags_within_k": max_bag <= tk.k,
            "uncovered": uncovered,
            "disconnected": disconnected + missing,
            "valid": max_bag <= tk.k and not uncovered and not disconnected and not missing,
        }


def tree_decomposition_tk(a: Structure, k: int, depth: int, max_plays: int = DEFAULT_MAX_PLAYS):
    """Bags are the active prefixes of each play; returns ``(decomposition, report)``."""
    tk = tk_bounded(a, k, depth, max_plays)
    bags = {(): frozenset()}
    for s in tk.universe:
        bags[s] = frozenset(active_prefixes(s))
    td = TreeDecomposition(bags)
    return td, td.validate(tk)


def position_of(s: Play, t: Play) -> Configuration:
    """Pebble -> (last source element, matching target element)."""
    if len(s) != len(t):
        raise PebblingError("plays have different lengths")
    if [p for p, _ in s] != [p for p, _ in t]:
        raise PebblingError("plays use different pebble sequences")
    g = {}
    for (p, a), (_, b) in zip(s, t):
        g[p] = (a, b)
    return Configuration(g)
