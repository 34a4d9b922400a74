"""Existential-positive formulas with the bounded-pebble box modality.

Formulas are immutable trees.  Variables are positive integers ``i`` standing
for ``x_i``.  Under ``Box(k, body)`` variable ``x_i`` is tied to pebble ``i``,
so every variable of the body must be at most ``k``.

Text form is an s-expression::

    (exists 1 (and (atom E 1 2) (atom E 2 1)))
    (box 2 (exists 1 (exists 2 (atom E 1 2))))

``(and)`` is true and ``(or)`` is false.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from pathlib import Path

from .comonad import DEFAULT_MAX_PLAYS, tk_bounded
from .errors import PebblingError
from .structures import Structure

MAX_BOX_NESTING = 2


class FormulaError(PebblingError, ValueError):
    pass


@dataclass(frozen=True)
class Atom:
    relation: str
    args: tuple


@dataclass(frozen=True)
class Eq:
    left: int
    right: int


@dataclass(frozen=True)
class And:
    parts: tuple


@dataclass(frozen=True)
class Or:
    parts: tuple


@dataclass(frozen=True)
class Exists:
    var: int
    body: object


@dataclass(frozen=True)
class Box:
    k: int
    body: object


Formula = Atom | Eq | And | Or | Exists | Box

TRUE = And(())
FALSE = Or(())


def conj(*parts) -> Formula:
    return parts[0] if len(parts) == 1 else And(tuple(parts))


def disj(*parts) -> Formula:
    return parts[0] if len(parts) == 1 else Or(tuple(parts))


def exists(vars, body) -> Formula:
    """``exists([1, 2], f)`` is ``Exists(1, Exists(2, f))``."""
    for v in reversed(list(vars)):
        body = Exists(v, body)
    return body


# -- syntax ----------------------------------------------------------------


def _tokens(text: str):
    return text.replace("(", " ( ").replace(")", " ) ").split()


def parse(text: str) -> Formula:
    toks = _tokens(text)
    if not toks:
        raise FormulaError("empty formula")
    pos = 0

    def num(tok):
        try:
            v = int(tok)
        except ValueError:
            raise FormulaError(f"expected a variable number, got {tok!r}") from None
        if v < 1:
            raise FormulaError(f"variables are numbered from 1, got {v}")
        return v

    def node():
        nonlocal pos
        if pos >= len(toks):
            raise FormulaError("unexpected end of formula")
        if toks[pos] != "(":
            raise FormulaError(f"expected '(' but found {toks[pos]!r}")
        pos += 1
        if pos >= len(toks):
            raise FormulaError("unexpected end of formula")
        head = toks[pos]
        pos += 1
        args = []
        while pos < len(toks) and toks[pos] != ")":
            if toks[pos] == "(":
                args.append(node())
            else:
                args.append(toks[pos])
                pos += 1
        if pos >= len(toks):
            raise FormulaError("missing ')'")
        pos += 1
        return build(head, args)

    def build(head, args):
        subs = [x for x in args if not isinstance(x, str)]
        words = [x for x in args if isinstance(x, str)]
        if head == "atom":
            if subs or not words:
                raise FormulaError("atom takes a relation name and variables")
            if len(words) < 2:
                raise FormulaError(f"atom {words[0]} has no arguments")
            return Atom(words[0], tuple(num(w) for w in words[1:]))
        if head == "eq":
            if subs or len(words) != 2:
                raise FormulaError("eq takes exactly two variables")
            return Eq(num(words[0]), num(words[1]))
        if head in ("and", "or"):
            if words:
                raise FormulaError(f"{head} takes formulas only")
            return (And if head == "and" else Or)(tuple(subs))
        if head in ("exists", "box"):
            if len(words) != 1 or len(subs) != 1 or not isinstance(args[0], str):
                raise FormulaError(f"{head} takes a number and one formula")
            n = num(words[0])
            return Exists(n, subs[0]) if head == "exists" else Box(n, subs[0])
        raise FormulaError(f"unknown connective {head!r}")

    f = node()
    if pos != len(toks):
        raise FormulaError(f"trailing input after formula: {' '.join(toks[pos:])}")
    return f


def load(path) -> Formula:
    return parse(Path(path).read_text())


def to_sexpr(f: Formula) -> str:
    if isinstance(f, Atom):
        return f"(atom {f.relation} {' '.join(map(str, f.args))})"
    if isinstance(f, Eq):
        return f"(eq {f.left} {f.right})"
    if isinstance(f, (And, Or)):
        head = "and" if isinstance(f, And) else "or"
        return "(" + " ".join([head] + [to_sexpr(p) for p in f.parts]) + ")"
    if isinstance(f, Exists):
        return f"(exists {f.var} {to_sexpr(f.body)})"
    if isinstance(f, Box):
        return f"(box {f.k} {to_sexpr(f.body)})"
    raise FormulaError(f"not a formula: {f!r}")


def free_vars(f: Formula, _memo=None) -> frozenset:
    memo = {} if _memo is None else _memo
    key = id(f)
    if key in memo:
        return memo[key][1]
    if isinstance(f, Atom):
        out = frozenset(f.args)
    elif isinstance(f, Eq):
        out = frozenset((f.left, f.right))
    elif isinstance(f, (And, Or)):
        out = frozenset().union(*(free_vars(p, memo) for p in f.parts))
    elif isinstance(f, Exists):
        out = free_vars(f.body, memo) - {f.var}
    elif isinstance(f, Box):
        out = free_vars(f.body, memo)
    else:
        raise FormulaError(f"not a formula: {f!r}")
    memo[key] = (f, out)  # keep f alive so its id stays unique
    return out


def _fold(f, leaf, combine, memo):
    """Bottom-up fold over the formula DAG, memoized by node identity."""
    key = id(f)
    if key in memo:
        return memo[key][1]
    if isinstance(f, (Atom, Eq)):
        out = leaf(f)
    elif isinstance(f, (And, Or)):
        out = combine(f, [_fold(p, leaf, combine, memo) for p in f.parts])
    elif isinstance(f, (Exists, Box)):
        out = combine(f, [_fold(f.body, leaf, combine, memo)])
    else:
        raise FormulaError(f"not a formula: {f!r}")
    memo[key] = (f, out)
    return out


def quantifier_depth(f: Formula) -> int:
    def combine(node, vals):
        best = max(vals, default=0)
        return best + 1 if isinstance(node, Exists) else best

    return _fold(f, lambda _: 0, combine, {})


def max_var(f: Formula) -> int:
    def leaf(node):
        return max(node.args) if isinstance(node, Atom) else max(node.left, node.right)

    def combine(node, vals):
        best = max(vals, default=0)
        return max(best, node.var) if isinstance(node, Exists) else best

    return _fold(f, leaf, combine, {})


def box_nesting(f: Formula) -> int:
    def combine(node, vals):
        best = max(vals, default=0)
        return best + 1 if isinstance(node, Box) else best

    return _fold(f, lambda _: 0, combine, {})


def size(f: Formula) -> int:
    """Number of nodes in the formula tree (shared subterms counted each time)."""
    if isinstance(f, (Atom, Eq)):
        return 1
    if isinstance(f, (And, Or)):
        return 1 + sum(size(p) for p in f.parts)
    return 1 + size(f.body)


def check_formula(f: Formula, signature=None) -> None:
    """Raise :class:`FormulaError` on arity mismatches or malformed boxes."""
    seen = set()

    def walk(g):
        if id(g) in seen:
            return
        seen.add(id(g))
        if isinstance(g, Atom):
            if signature is not None:
                if g.relation not in signature:
                    raise FormulaError(f"unknown relation {g.relation!r}")
                if signature.arity(g.relation) != len(g.args):
                    raise FormulaError(f"relation {g.relation!r} has arity {signature.arity(g.relation)}, got {len(g.args)} arguments")
        elif isinstance(g, (And, Or)):
            for p in g.parts:
                walk(p)
        elif isinstance(g, Exists):
            walk(g.body)
        elif isinstance(g, Box):
            if g.k < 1:
                raise FormulaError("box needs k >= 1")
            if max_var(g.body) > g.k:
                raise FormulaError(f"box {g.k} body uses a variable above x{g.k}")
            walk(g.body)
        elif not isinstance(g, Eq):
            raise FormulaError(f"not a formula: {g!r}")

    walk(f)
    if box_nesting(f) > MAX_BOX_NESTING:
        raise FormulaError(f"box nesting deeper than {MAX_BOX_NESTING} is not supported")


# -- evaluation ------------------------------------------------------------

ANY = object()  # wildcard column value in answer tables


class _Table:
    """Satisfying assignments: ``vars`` is a tuple of variables, ``rows`` a set
    of value tuples in which ``ANY`` stands for every element."""

    __slots__ = ("vars", "rows")

    def __init__(self, vars, rows):
        self.vars = tuple(vars)
        self.rows = rows if isinstance(rows, (set, frozenset)) else set(rows)


def _join(left: _Table, right: _Table) -> _Table:
    if len(right.rows) < len(left.rows):
        left, right = right, left
    shared = [v for v in right.vars if v in left.vars]
    lpos = [left.vars.index(v) for v in shared]
    rpos = [right.vars.index(v) for v in shared]
    extra = [i for i, v in enumerate(right.vars) if v not in left.vars]
    out_vars = left.vars + tuple(right.vars[i] for i in extra)
    index = {}
    wild = []
    for r in right.rows:
        key = tuple(r[i] for i in rpos)
        if any(x is ANY for x in key):
            wild.append(r)
        else:
            index.setdefault(key, []).append(r)
    everything = list(right.rows)
    rows = set()
    for l in left.rows:
        key = tuple(l[i] for i in lpos)
        candidates = everything if any(x is ANY for x in key) else index.get(key, []) + wild
        for r in candidates:
            merged = list(l)
            ok = True
            for li, ri in zip(lpos, rpos):
                a, b = merged[li], r[ri]
                if a is ANY:
                    merged[li] = b
                elif b is not ANY and a != b:
                    ok = False
                    break
            if ok:
                rows.add(tuple(merged) + tuple(r[i] for i in extra))
    return _Table(out_vars, rows)


def _pad(t: _Table, vars) -> set:
    pos = {v: i for i, v in enumerate(t.vars)}
    return {tuple(r[pos[v]] if v in pos else ANY for v in vars) for r in t.rows}


class _Evaluator:
    def __init__(self, a: Structure, max_plays: int, extra_depth: int):
        self.a = a
        self.max_plays = max_plays
        self.extra_depth = extra_depth
        self.memo = {}

    def table(self, f) -> _Table:
        key = id(f)
        hit = self.memo.get(key)
        if hit is not None:
            return hit[1]
        t = self._table(f)
        self.memo[key] = (f, t)
        return t

    def _table(self, f) -> _Table:
        a = self.a
        if isinstance(f, Atom):
            if f.relation not in a.relations:
                raise FormulaError(f"relation {f.relation!r} is not in the signature")
            if len(f.args) != a.signature.arity(f.relation):
                raise FormulaError(f"relation {f.relation!r} has arity {a.signature.arity(f.relation)}")
            vars = tuple(dict.fromkeys(f.args))
            if len(vars) == len(f.args):
                return _Table(vars, a.relations[f.relation])
            rows = set()
            for t in a.relations[f.relation]:
                val = {}
                if all(val.setdefault(v, x) == x for v, x in zip(f.args, t)):
                    rows.add(tuple(val[v] for v in vars))
            return _Table(vars, rows)
        if isinstance(f, Eq):
            if f.left == f.right:
                return _Table((f.left,), {(ANY,)})
            return _Table((f.left, f.right), {(x, x) for x in a.universe})
        if isinstance(f, And):
            tabs = []
            for p in f.parts:
                t = self.table(p)
                if not t.rows:
                    return _Table((), ())
                tabs.append(t)
            out = _Table((), {()})
            for t in sorted(tabs, key=lambda t: len(t.rows)):
                out = _join(out, t)
                if not out.rows:
                    break
            return out
        if isinstance(f, Or):
            tabs = [self.table(p) for p in f.parts]
            vars = tuple(dict.fromkeys(v for t in tabs for v in t.vars))
            rows = set()
            for t in tabs:
                rows |= _pad(t, vars)
            return _Table(vars, rows)
        if isinstance(f, Exists):
            t = self.table(f.body)
            if f.var not in t.vars:
                return t
            keep = [i for i, v in enumerate(t.vars) if v != f.var]
            return _Table(tuple(t.vars[i] for i in keep), {tuple(r[i] for i in keep) for r in t.rows})
        if isinstance(f, Box):
            fv = sorted(free_vars(f.body))
            m = fv[-1] if fv else 0
            if fv != list(range(1, m + 1)):
                raise FormulaError("free variables of a box body must be x1..xm with no gaps when nested")
            rows = set()
            for tup in product(a.universe, repeat=m):
                if eval_box(a, tup, f, max_plays=self.max_plays, extra_depth=self.extra_depth):
                    rows.add(tup)
            return _Table(tuple(fv), rows)
        raise FormulaError(f"not a formula: {f!r}")


def _matches(t: _Table, env) -> bool:
    want = tuple(env[v] for v in t.vars)
    if want in t.rows:
        return True
    return any(all(x is ANY or x == y for x, y in zip(r, want)) for r in t.rows)


def answers(a: Structure, f: Formula, *, max_plays: int = DEFAULT_MAX_PLAYS, extra_depth: int = 0) -> tuple[tuple, set]:
    """``(vars, rows)``: the satisfying assignments of ``f`` in ``a``, with
    :data:`ANY` marking columns that may take any value."""
    t = _Evaluator(a, max_plays, extra_depth).table(f)
    return t.vars, t.rows


def evaluate(a: Structure, env, f: Formula, *, max_plays: int = DEFAULT_MAX_PLAYS, extra_depth: int = 0) -> bool:
    """Truth of ``f`` in ``a`` under ``env`` (a mapping from variable to element).

    Box subformulas are evaluated with :func:`eval_box`.
    """
    env = dict(env or {})
    missing = sorted(free_vars(f) - set(env))
    if missing:
        raise FormulaError(f"unbound free variable(s): {', '.join(f'x{v}' for v in missing)}")
    for v, x in env.items():
        if x not in a:
            raise FormulaError(f"x{v} is bound to {x!r}, which is not an element")
    t = _Evaluator(a, max_plays, extra_depth).table(f)
    return _matches(t, env)


def eval_box(a: Structure, tup, f: Box, *, max_plays: int = DEFAULT_MAX_PLAYS, extra_depth: int = 0) -> bool:
    """``a, tup |= box_k body``.

    The tuple ``(a_1, ..., a_j)`` is sent to the plays
    ``alpha(a_i) = [(1, a_1), ..., (i, a_i)]`` and ``x_i`` is bound to
    ``alpha(a_i)``.  The body is evaluated in the plays of length at most
    ``j + quantifier_depth(body) + extra_depth``: each quantifier extends
    the longest current play by one move, so witnesses never need to go
    deeper.  Truth in the fragment implies truth in the full structure since
    the fragment is an induced substructure and the body is positive.
    """
    if not isinstance(f, Box):
        raise FormulaError("eval_box expects a box formula")
    check_formula(f)
    tup = tuple(tup)
    if len(tup) > f.k:
        raise FormulaError(f"tuple of length {len(tup)} exceeds k={f.k}")
    for x in tup:
        if x not in a:
            raise FormulaError(f"{x!r} is not an element")
    fv = free_vars(f.body)
    if any(v > len(tup) for v in fv):
        raise FormulaError(f"free variables {sorted(fv)} need a tuple of length {max(fv)}")
    depth = max(1, len(tup) + quantifier_depth(f.body) + extra_depth)
    table = _box_table(a, f.k, depth, f.body, max_plays, extra_depth)
    env = {i + 1: tuple((j + 1, tup[j]) for j in range(i + 1)) for i in range(len(tup))}
    return _matches(table, env)


@lru_cache(maxsize=64)
def _box_table(a: Structure, k: int, depth: int, body, max_plays: int, extra_depth: int) -> _Table:
    tk = _fragment(a, k, depth, max_plays)
    return _Evaluator(tk.structure, max_plays, extra_depth).table(body)


@lru_cache(maxsize=16)
def _fragment(a: Structure, k: int, depth: int, max_plays: int):
    return tk_bounded(a, k, depth, max_plays)


# -- canonical sentences ---------------------------------------------------


def canonical_query(a: Structure) -> Formula:
    """One variable per element (in universe order) and one atom per tuple."""
    var = {x: i + 1 for i, x in enumerate(a.universe)}
    atoms = [Atom(name, tuple(var[x] for x in t)) for name, t in a.tuples()]
    return exists(range(1, len(a.universe) + 1), And(tuple(atoms)))


def characteristic_sentence(a: Structure, k: int, depth: int) -> Formula:
    """The strongest existential-positive ``k``-variable sentence of
    quantifier depth ``depth`` true in ``a``.

    For a partial assignment ``g`` of variables to elements let ``chi_0(g)``
    be the conjunction of atoms and equalities true under ``g``, and
    ``chi_r(g) = chi_0(g) and AND over i <= k, x in a of exists x_i chi_{r-1}(g[i -> x])``.
    A structure ``b`` satisfies ``chi_depth(empty)`` iff it satisfies every
    such sentence true in ``a``: by induction on formulas, any positive
    formula of depth ``r`` true at ``g`` in ``a`` follows from ``chi_r(g)``.
    The result is a DAG; identical subformulas are shared.
    """
    sig = a.signature
    memo = {}

    def base(g):
        dom = sorted(g)
        parts = []
        for i in dom:
            for j in dom:
                if i < j and g[i] == g[j]:
                    parts.append(Eq(i, j))
        for name, arity in sig:
            rel = a.relations[name]
            for vs in product(dom, repeat=arity):
                if tuple(g[v] for v in vs) in rel:
                    parts.append(Atom(name, vs))
        return parts

    def chi(r, g):
        key = (r, tuple(sorted(g.items(), key=lambda kv: kv[0])))
        if key in memo:
            return memo[key]
        parts = base(g)
        if r > 0:
            for i in range(1, k + 1):
                for x in a.universe:
                    h = dict(g)
                    h[i] = x
                    parts.append(Exists(i, chi(r - 1, h)))
        out = And(tuple(parts))
        memo[key] = out
        return out

    return chi(depth, {})
