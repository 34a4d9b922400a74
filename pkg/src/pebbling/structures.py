"""Finite relational structures and the brute-force oracles built on them.

A :class:`Structure` is immutable.  Its universe is an ordered tuple and that
order is the canonical element order used for every deterministic choice made
elsewhere in the package (least witnesses, tie-breaking, play ordering).
"""

from __future__ import annotations

import json
from collections.abc import Hashable, Iterable, Iterator, Mapping
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import networkx as nx

from .errors import SignatureMismatch, StructureError

Element = Hashable
Tuple = tuple


@dataclass(frozen=True)
class Signature:
    """An ordered list of ``(name, arity)`` relation symbols."""

    relations: tuple[tuple[str, int], ...]

    def __post_init__(self):
        seen = set()
        for name, arity in self.relations:
            if not isinstance(name, str) or not name:
                raise StructureError(f"relation name must be a non-empty string, got {name!r}")
            if name in seen:
                raise StructureError(f"duplicate relation name {name!r}")
            if not isinstance(arity, int) or arity < 1:
                raise StructureError(f"relation {name!r} has arity {arity!r}; arity must be >= 1")
            seen.add(name)

    @classmethod
    def of(cls, value: "Signature | Mapping[str, int] | Iterable[tuple[str, int]]") -> "Signature":
        if isinstance(value, Signature):
            return value
        if isinstance(value, Mapping):
            value = value.items()
        return cls(tuple((str(n), int(a)) for n, a in value))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.relations)

    def arity(self, name: str) -> int:
        for n, a in self.relations:
            if n == name:
                return a
        raise KeyError(name)

    def __contains__(self, name) -> bool:
        return any(n == name for n, _ in self.relations)

    def __iter__(self):
        return iter(self.relations)

    def __len__(self):
        return len(self.relations)

    def as_dict(self) -> dict[str, int]:
        return dict(self.relations)


class Structure:
    """A finite structure: signature, ordered universe, and relation tuples.

    The constructor deduplicates tuples but does not reject malformed data;
    use :func:`validate` (or the loaders, which call it) for that.
    """

    __slots__ = ("signature", "universe", "relations", "_index")

    def __init__(self, signature, universe: Iterable[Element], relations: Mapping[str, Iterable] | None = None):
        self.signature = Signature.of(signature)
        self.universe = tuple(universe)
        relations = dict(relations or {})
        rels = {}
        for name in self.signature.names:
            rels[name] = frozenset(tuple(t) for t in relations.pop(name, ()))
        # unknown names are kept so that validate() can report them
        for name, tuples in relations.items():
            rels[name] = frozenset(tuple(t) for t in tuples)
        self.relations = rels
        self._index = {e: i for i, e in enumerate(self.universe)}

    def __repr__(self):
        sizes = ", ".join(f"{n}:{len(self.relations[n])}" for n in self.signature.names)
        return f"Structure(|A|={len(self.universe)}, {sizes})"

    def __len__(self):
        return len(self.universe)

    def __eq__(self, other):
        if not isinstance(other, Structure):
            return NotImplemented
        return (
            self.signature == other.signature
            and self.universe == other.universe
            and self.relations == other.relations
        )

    def __hash__(self):
        return hash((self.signature, self.universe, frozenset(self.relations.items())))

    def index(self, element) -> int:
        return self._index[element]

    def __contains__(self, element) -> bool:
        return element in self._index

    def tuples(self) -> Iterator[tuple[str, tuple]]:
        """All ``(relation name, tuple)`` facts in signature order."""
        for name in self.signature.names:
            for t in sorted(self.relations[name], key=self._tuple_key):
                yield name, t

    def _tuple_key(self, t):
        return tuple(self._index.get(x, len(self._index)) for x in t)

    def with_universe_order(self, order: Iterable[Element]) -> "Structure":
        return Structure(self.signature, order, self.relations)


def require_same_signature(a: Structure, b: Structure) -> None:
    if a.signature != b.signature:
        raise SignatureMismatch(
            f"signature mismatch: {a.signature.as_dict()} vs {b.signature.as_dict()}"
        )


def validate(s: Structure) -> list[str]:
    """Return a list of human-readable invariant violations (empty if valid)."""
    problems = []
    if not s.universe:
        problems.append("universe is empty")
    if len(set(s.universe)) != len(s.universe):
        problems.append("universe lists an element more than once")
    for name, tuples in s.relations.items():
        if name not in s.signature:
            problems.append(f"relation {name!r} is not declared in the signature")
            continue
        arity = s.signature.arity(name)
        for t in sorted(tuples, key=repr):
            if len(t) != arity:
                problems.append(f"{name}{t!r}: tuple has length {len(t)}, arity is {arity}")
            for x in t:
                if x not in s:
                    problems.append(f"{name}{t!r}: element {x!r} is not in the universe")
    return problems


def check(s: Structure) -> Structure:
    problems = validate(s)
    if problems:
        raise StructureError("; ".join(problems))
    return s


def gaifman(s: Structure) -> nx.Graph:
    """Undirected graph joining distinct elements that share a tuple."""
    g = nx.Graph()
    g.add_nodes_from(s.universe)
    for _, t in s.tuples():
        for x, y in combinations(t, 2):
            if x != y:
                g.add_edge(x, y)
    return g


# -- homomorphisms ---------------------------------------------------------


def is_homomorphism(h: Mapping, a: Structure, b: Structure) -> bool:
    if any(x not in h or h[x] not in b for x in a.universe):
        return False
    for name, t in a.tuples():
        if tuple(h[x] for x in t) not in b.relations[name]:
            return False
    return True


def _constraints_by_last(a: Structure):
    """Group every fact of ``a`` under the position of its last element."""
    last = [[] for _ in a.universe]
    for name, t in a.tuples():
        pos = max(a.index(x) for x in t)
        last[pos].append((name, t))
    return last


def iter_homomorphisms(a: Structure, b: Structure, fixed: Mapping | None = None) -> Iterator[dict]:
    """Yield every homomorphism ``a -> b`` in canonical (lexicographic) order.

    ``fixed`` pins some elements of ``a`` to given images.
    """
    require_same_signature(a, b)
    fixed = dict(fixed or {})
    last = _constraints_by_last(a)
    order = a.universe
    h: dict = {}

    def ok(i):
        for name, t in last[i]:
            if tuple(h[x] for x in t) not in b.relations[name]:
                return False
        return True

    def search(i):
        if i == len(order):
            yield dict(h)
            return
        x = order[i]
        candidates = (fixed[x],) if x in fixed else b.universe
        for y in candidates:
            h[x] = y
            if ok(i):
                yield from search(i + 1)
        h.pop(x, None)

    yield from search(0)


def find_homomorphism(a: Structure, b: Structure, fixed: Mapping | None = None) -> dict | None:
    """First homomorphism ``a -> b`` in canonical order, or ``None``."""
    return next(iter_homomorphisms(a, b, fixed), None)


def is_isomorphic(a: Structure, b: Structure) -> bool:
    """Exhaustive search for a bijection preserving every relation both ways."""
    require_same_signature(a, b)
    if len(a.universe) != len(b.universe):
        return False
    if any(len(a.relations[n]) != len(b.relations[n]) for n in a.signature.names):
        return False
    last = _constraints_by_last(a)
    order = a.universe
    h: dict = {}
    used = set()

    def search(i):
        if i == len(order):
            # injective image of R^A inside R^B with |R^A| = |R^B| is all of R^B
            return True
        x = order[i]
        for y in b.universe:
            if y in used:
                continue
            h[x] = y
            if all(tuple(h[z] for z in t) in b.relations[name] for name, t in last[i]):
                used.add(y)
                if search(i + 1):
                    return True
                used.discard(y)
            del h[x]
        return False

    return search(0)


# -- derived structures ----------------------------------------------------


def expand_identity(a: Structure, name: str = "I") -> Structure:
    """Add a binary relation interpreted as equality on the universe."""
    if name in a.signature:
        raise StructureError(f"signature already contains a relation named {name!r}")
    sig = Signature(a.signature.relations + ((name, 2),))
    rels = dict(a.relations)
    rels[name] = {(x, x) for x in a.universe}
    return Structure(sig, a.universe, rels)


def induced_substructure(a: Structure, subset: Iterable[Element]) -> Structure:
    """Restrict ``a`` to ``subset``; the result keeps ``a``'s element order."""
    keep = set(subset)
    if not keep:
        raise StructureError("cannot induce a substructure on an empty set")
    missing = [x for x in keep if x not in a]
    if missing:
        raise StructureError(f"elements not in the universe: {sorted(map(repr, missing))}")
    universe = [x for x in a.universe if x in keep]
    rels = {n: {t for t in ts if all(x in keep for x in t)} for n, ts in a.relations.items()}
    return Structure(a.signature, universe, rels)


def core(a: Structure) -> Structure:
    """Smallest retract of ``a``.

    Candidate subsets are tried by increasing size, each size in canonical
    (lexicographic) order, so the first hit is minimal and deterministic.
    """
    n = len(a.universe)
    for size in range(1, n + 1):
        for subset in combinations(a.universe, size):
            sub = induced_substructure(a, subset)
            if find_homomorphism(a, sub, fixed={x: x for x in subset}) is not None:
                return sub
    raise AssertionError("unreachable: the identity is always a retraction")


def retraction(a: Structure, sub: Structure) -> dict | None:
    """A homomorphism ``a -> sub`` fixing ``sub``'s universe pointwise."""
    return find_homomorphism(a, sub, fixed={x: x for x in sub.universe})


# -- serialization ---------------------------------------------------------


def encode_element(e) -> str:
    """String form of an element for structure files.

    Plays (tuples of ``(pebble, element)`` moves) become ``"p1:a1;p2:a2"``;
    other tuples are joined with ``|``.
    """
    if isinstance(e, str):
        return e
    if isinstance(e, tuple):
        if e and all(isinstance(m, tuple) and len(m) == 2 and isinstance(m[0], int) for m in e):
            return ";".join(f"{p}:{encode_element(x)}" for p, x in e)
        return "|".join(encode_element(x) for x in e)
    return str(e)


def to_dict(s: Structure) -> dict:
    enc = {x: encode_element(x) for x in s.universe}
    return {
        "signature": s.signature.as_dict(),
        "universe": [enc[x] for x in s.universe],
        "relations": {
            name: [[enc[x] for x in t] for t in sorted(s.relations[name], key=s._tuple_key)]
            for name in s.signature.names
        },
    }


def from_dict(doc: Mapping) -> Structure:
    try:
        sig = Signature.of(doc["signature"])
        universe = list(doc["universe"])
        rels = doc.get("relations", {})
    except (KeyError, TypeError) as exc:
        raise StructureError(f"malformed structure document: {exc}") from exc
    if not isinstance(rels, Mapping):
        raise StructureError("'relations' must be an object")
    s = Structure(sig, universe, {n: [tuple(t) for t in ts] for n, ts in rels.items()})
    return check(s)


def dumps(s: Structure, **kw) -> str:
    return json.dumps(to_dict(s), **kw)


def loads(text: str) -> Structure:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StructureError(f"invalid JSON: {exc}") from exc
    return from_dict(doc)


def load(path) -> Structure:
    return loads(Path(path).read_text())


def save(s: Structure, path) -> None:
    Path(path).write_text(dumps(s, indent=1) + "\n")
