"""Generators for the standard witness structures.

Graphs live over the signature ``{E: 2}`` with vertices named ``"0", "1", ...``.
Parity systems live over ``{R0: 3, R1: 3}``.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from itertools import permutations, product
from pathlib import Path

from .errors import StructureError
from .structures import Signature, Structure, check, is_homomorphism

GRAPH = Signature((("E", 2),))
PARITY = Signature((("R0", 3), ("R1", 3)))

KINDS = ("complete", "cycle", "symmetric-cycle", "path", "symmetric-path", "grid")


def _graph(n, edges) -> Structure:
    return Structure(GRAPH, [str(i) for i in range(n)], {"E": [(str(x), str(y)) for x, y in edges]})


def complete(n: int) -> Structure:
    if n < 1:
        raise StructureError("K_n needs n >= 1")
    return _graph(n, [(i, j) for i in range(n) for j in range(n) if i != j])


def cycle(n: int) -> Structure:
    """Directed cycle 0 -> 1 -> ... -> n-1 -> 0."""
    if n < 3:
        raise StructureError("cycles need n >= 3")
    return _graph(n, [(i, (i + 1) % n) for i in range(n)])


def symmetric_cycle(n: int) -> Structure:
    if n < 3:
        raise StructureError("cycles need n >= 3")
    edges = [(i, (i + 1) % n) for i in range(n)]
    return _graph(n, edges + [(y, x) for x, y in edges])


def path(n: int) -> Structure:
    """Directed path on ``n`` vertices (``n - 1`` edges)."""
    if n < 1:
        raise StructureError("paths need n >= 1")
    return _graph(n, [(i, i + 1) for i in range(n - 1)])


def symmetric_path(n: int) -> Structure:
    if n < 1:
        raise StructureError("paths need n >= 1")
    edges = [(i, i + 1) for i in range(n - 1)]
    return _graph(n, edges + [(y, x) for x, y in edges])


def grid(n: int, m: int | None = None) -> Structure:
    """Symmetric ``n x m`` grid graph, vertices numbered row by row."""
    m = n if m is None else m
    if n < 1 or m < 1:
        raise StructureError("grid sides must be >= 1")
    edges = []
    for r in range(n):
        for c in range(m):
            v = r * m + c
            if c + 1 < m:
                edges += [(v, v + 1), (v + 1, v)]
            if r + 1 < n:
                edges += [(v, v + m), (v + m, v)]
    return _graph(n * m, edges)


def generate(kind: str, n: int) -> Structure:
    builders = {
        "complete": complete,
        "cycle": cycle,
        "symmetric-cycle": symmetric_cycle,
        "path": path,
        "symmetric-path": symmetric_path,
        "grid": grid,
    }
    if kind not in builders:
        raise StructureError(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}")
    return builders[kind](n)


def digraph(n: int, edges: Iterable[tuple[int, int]]) -> Structure:
    return _graph(n, edges)


def binary_structures(n: int, up_to_isomorphism: bool = True) -> list[Structure]:
    """Every structure over ``{E: 2}`` on ``n`` elements (loops allowed).

    With ``up_to_isomorphism`` one representative per class is returned: the
    one whose edge set is lexicographically least over all relabellings.
    """
    cells = [(i, j) for i in range(n) for j in range(n)]
    perms = list(permutations(range(n)))
    seen = set()
    out = []
    for bits in product((0, 1), repeat=len(cells)):
        edges = frozenset(c for c, bit in zip(cells, bits) if bit)
        if up_to_isomorphism:
            canon = min(tuple(sorted((p[x], p[y]) for x, y in edges)) for p in perms)
            if canon in seen:
                continue
            seen.add(canon)
            edges = canon
        out.append(_graph(n, sorted(edges)))
    return out


# -- parity systems --------------------------------------------------------


def z2() -> Structure:
    """Two-element template: R0 / R1 hold the triples of even / odd parity."""
    triples = list(product((0, 1), repeat=3))
    return Structure(
        PARITY,
        ["0", "1"],
        {
            "R0": [tuple(map(str, t)) for t in triples if sum(t) % 2 == 0],
            "R1": [tuple(map(str, t)) for t in triples if sum(t) % 2 == 1],
        },
    )


@dataclass(frozen=True)
class Z2System:
    """Equations ``x + y + z = parity`` over GF(2)."""

    variables: tuple
    equations: tuple = field(default=())

    def __post_init__(self):
        vs = set(self.variables)
        if len(vs) != len(self.variables):
            raise StructureError("duplicate variable")
        for eq in self.equations:
            if len(eq) != 4:
                raise StructureError(f"equation {eq!r} must have three variables and a parity")
            *xs, parity = eq
            if parity not in (0, 1):
                raise StructureError(f"equation {eq!r}: parity must be 0 or 1")
            for x in xs:
                if x not in vs:
                    raise StructureError(f"equation {eq!r}: unknown variable {x!r}")

    @classmethod
    def from_dict(cls, doc: Mapping) -> "Z2System":
        try:
            return cls(tuple(doc["variables"]), tuple(tuple(e) for e in doc["equations"]))
        except (KeyError, TypeError) as exc:
            raise StructureError(f"malformed system document: {exc}") from exc

    def to_dict(self) -> dict:
        return {"variables": list(self.variables), "equations": [list(e) for e in self.equations]}

    @classmethod
    def load(cls, path) -> "Z2System":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except json.JSONDecodeError as exc:
            raise StructureError(f"invalid JSON: {exc}") from exc


def system_to_structure(system: Z2System) -> Structure:
    rels = {"R0": [], "R1": []}
    for x, y, z, parity in system.equations:
        rels[f"R{parity}"].append((x, y, z))
    return Structure(PARITY, system.variables, rels)


MERMIN_EQUATIONS = (
    ("A", "B", "C", 0),
    ("D", "E", "F", 0),
    ("G", "H", "I", 0),
    ("A", "D", "G", 0),
    ("B", "E", "H", 0),
    ("C", "F", "I", 1),
)


def mermin_system() -> Z2System:
    return Z2System(tuple("ABCDEFGHI"), MERMIN_EQUATIONS)


def mermin() -> Structure:
    """The magic square: even rows, even first two columns, odd last column."""
    return system_to_structure(mermin_system())


def contradiction_system() -> Z2System:
    """Smallest unsatisfiable system: ``x+y+z = 0`` and ``x+y+z = 1``."""
    return Z2System(("x", "y", "z"), (("x", "y", "z", 0), ("x", "y", "z", 1)))


# -- CFI pair --------------------------------------------------------------


@dataclass(frozen=True)
class CFIPair:
    base: Structure
    a0: Structure
    a1: Structure
    embedding: dict  # base -> a0, a |-> (a, 0)
    projection: dict  # a1 -> z2, (a, i) |-> i


def cfi_pair(a: Structure) -> CFIPair:
    """Twisted/untwisted doubling of a parity structure over ``A x {0,1}``.

    In ``a0`` both relations require tag parity 0; in ``a1`` the ``R1``
    triples require tag parity 1.
    """
    if a.signature != PARITY:
        raise StructureError(f"CFI pair needs signature {PARITY.as_dict()}, got {a.signature.as_dict()}")
    universe = [(x, i) for x in a.universe for i in (0, 1)]

    def lift(name, parity):
        return [
            ((x, i), (y, j), (z, l))
            for x, y, z in a.relations[name]
            for i, j, l in product((0, 1), repeat=3)
            if (i + j + l) % 2 == parity
        ]

    a0 = Structure(PARITY, universe, {"R0": lift("R0", 0), "R1": lift("R1", 0)})
    a1 = Structure(PARITY, universe, {"R0": lift("R0", 0), "R1": lift("R1", 1)})
    embedding = {x: (x, 0) for x in a.universe}
    projection = {(x, i): str(i) for x, i in universe}
    return CFIPair(a, check(a0), check(a1), embedding, projection)


def check_cfi_pair(pair: CFIPair) -> bool:
    """Both witness maps are homomorphisms."""
    return is_homomorphism(pair.embedding, pair.base, pair.a0) and is_homomorphism(
        pair.projection, pair.a1, z2()
    )


@dataclass
class CFIWitnessReport:
    """Outcome of checking the tag-shifting map on bounded fragments.

    The check covers plays up to ``depth`` only; it says nothing about
    longer plays.
    """

    k: int
    depth: int
    plays: int
    tuples: int
    bijective: bool
    preserves: bool
    reflects: bool
    counterexample: tuple | None = None

    @property
    def valid(self) -> bool:
        return self.bijective and self.preserves and self.reflects

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "depth": self.depth,
            "plays": self.plays,
            "tuples": self.tuples,
            "bijective": self.bijective,
            "preserves": self.preserves,
            "reflects": self.reflects,
            "valid": self.valid,
            "scope": "bounded fragment",
        }


def cfi_witness_map(pair: CFIPair, transducer):
    """The map on plays over ``a0`` flipping each tag by ``f`` of the untagged prefix.

    ``f`` is the co-Kleisli map into Z2 read off ``transducer``: its value on a
    play is Duplicator's last answer.
    """
    from .games import realize

    def f_prime(s):
        bare = tuple((p, x) for p, (x, _) in s)
        answers = realize(transducer, bare)
        return tuple((p, (x, i ^ int(b))) for (p, (x, i)), (_, b) in zip(s, answers))

    return f_prime


def cfi_witness_iso(a: Structure, k: int, transducer=None, depth: int = 4, max_plays: int | None = None) -> CFIWitnessReport:
    """Verify the explicit isomorphism between bounded ``T_k a0`` and ``T_k a1``.

    Without a transducer one is built from the largest existential strategy
    for ``a -> Z2`` with ``k`` pebbles (raising if there is none).
    """
    from .comonad import DEFAULT_MAX_PLAYS, tk_bounded
    from .errors import PebblingError
    from .games import determinize, existential_strategy

    if transducer is None:
        strategy = existential_strategy(a, z2(), k)
        if strategy is None:
            raise PebblingError(f"no {k}-pebble strategy from the system to Z2")
        transducer = determinize(strategy, explore=False)
    if transducer.k != k:
        raise PebblingError(f"transducer has k={transducer.k}, expected {k}")
    cap = DEFAULT_MAX_PLAYS if max_plays is None else max_plays
    pair = cfi_pair(a)
    t0 = tk_bounded(pair.a0, k, depth, cap)
    t1 = tk_bounded(pair.a1, k, depth, cap)
    fp = cfi_witness_map(pair, transducer)
    image = {s: fp(s) for s in t0.universe}
    targets = set(t1.universe)
    bijective = len(set(image.values())) == len(image) and set(image.values()) == targets
    preserves = True
    counterexample = None
    count = 0
    for name, t in t0.structure.tuples():
        count += 1
        if tuple(image[s] for s in t) not in t1.structure.relations[name]:
            preserves = False
            counterexample = (name, t)
            break
    sizes_match = all(
        len(t0.structure.relations[n]) == len(t1.structure.relations[n]) for n in PARITY.names
    )
    # an injective tuple map between equal-size finite relations is onto
    reflects = preserves and bijective and sizes_match
    return CFIWitnessReport(k, depth, len(image), count, bijective, preserves, reflects, counterexample)


# -- the no-go instance ----------------------------------------------------


@dataclass
class NoGoReport:
    m: int
    cycle: bool  # C3 ->_2 C_m
    path: bool  # C3 ->_2 P_m
    chain: list
    chain_linked: bool

    @property
    def holds(self) -> bool:
        return self.cycle and not self.path and self.chain_linked

    def to_dict(self) -> dict:
        from .structures import encode_element

        return {
            "m": self.m,
            "cycle": self.cycle,
            "path": self.path,
            "chain": [encode_element(s) for s in self.chain],
            "chain_linked": self.chain_linked,
            "holds": self.holds,
        }


def nogo_chain(length: int = 6) -> list:
    """Plays ``[(1,0)], [(1,0),(2,1)], [(1,0),(2,1),(1,2)], ...`` over the 3-cycle."""
    moves = [(1 + i % 2, str(i % 3)) for i in range(length)]
    return [tuple(moves[: i + 1]) for i in range(length)]


def nogo_demo(m: int, chain_length: int = 6) -> NoGoReport:
    """Two pebbles map the directed 3-cycle into ``C_m`` but not into ``P_m``,
    while consecutive plays of :func:`nogo_chain` are joined by ``E`` in
    ``T_2`` of the 3-cycle."""
    from .comonad import tk_holds
    from .games import arrow_k

    if m < 3:
        raise StructureError("the no-go demonstration needs m >= 3")
    c3 = cycle(3)
    chain = nogo_chain(chain_length)
    linked = all(tk_holds(c3, "E", (chain[i], chain[i + 1])) for i in range(len(chain) - 1))
    return NoGoReport(m, arrow_k(c3, cycle(m), 2), arrow_k(c3, path(m), 2), chain, linked)
