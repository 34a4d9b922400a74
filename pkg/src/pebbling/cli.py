"""Command-line interface: ``pebbling SUBCOMMAND ...``.

Boolean verdicts exit 0 for yes and 1 for no; numeric and generator commands
exit 0; malformed input, signature mismatches and size caps exit 2.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import comonad, constructions, games, logic, structures, width
from .errors import PebblingError
from .structures import encode_element


@dataclass
class CommandResult:
    verdict: object
    witness: object = None
    timing_ms: float = 0.0
    text: str | None = None  # human-readable override

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "witness": self.witness, "timing_ms": round(self.timing_ms, 3)}


def _load(path) -> structures.Structure:
    try:
        return structures.load(path)
    except FileNotFoundError:
        raise PebblingError(f"no such file: {path}") from None


def _load_system(path) -> constructions.Z2System:
    try:
        return constructions.Z2System.load(path)
    except FileNotFoundError:
        raise PebblingError(f"no such file: {path}") from None


def _mapping(h) -> dict | None:
    if h is None:
        return None
    return {encode_element(x): encode_element(y) for x, y in h.items()}


def _structure_result(s, args) -> CommandResult:
    doc = structures.to_dict(s)
    if getattr(args, "out", None):
        structures.save(s, args.out)
        return CommandResult(None, doc, text=f"wrote {args.out}")
    return CommandResult(None, doc, text=json.dumps(doc, indent=1))


def _check_universe(s, args):
    if len(s.universe) > args.max_universe:
        raise PebblingError(f"structure has {len(s.universe)} elements; --max-universe is {args.max_universe}")


# -- subcommands -------------------------------------------------------------


def cmd_hom(args):
    a, b = _load(args.a), _load(args.b)
    h = structures.find_homomorphism(a, b)
    return CommandResult(h is not None, _mapping(h))


def cmd_iso(args):
    a, b = _load(args.a), _load(args.b)
    structures.require_same_signature(a, b)
    return CommandResult(structures.is_isomorphic(a, b))


def cmd_core(args):
    a = _load(args.a)
    c = structures.core(a)
    doc = structures.to_dict(c)
    return CommandResult(len(c.universe), doc, text=json.dumps(doc, indent=1))


def cmd_consistency(args):
    a, b = _load(args.a), _load(args.b)
    structures.require_same_signature(a, b)
    s = games.existential_strategy(a, b, args.k)
    return CommandResult(s is not None, None if s is None else {"positions": len(s)})


def cmd_consistency_number(args):
    a, b = _load(args.a), _load(args.b)
    return CommandResult(games.consistency_number(a, b))


def cmd_equiv(args):
    a, b = _load(args.a), _load(args.b)
    structures.require_same_signature(a, b)
    if args.game == "ep":
        v = games.arrow_k(a, b, args.k) and games.arrow_k(b, a, args.k)
    elif args.game == "bf":
        v = games.back_and_forth_equiv(a, b, args.k)
    else:
        v = games.bijection_game_equiv(a, b, args.k)
    return CommandResult(v)


def cmd_treewidth(args):
    a = _load(args.a)
    tw, order = width.treewidth_with_order(a, args.max_universe)
    return CommandResult(tw, {"elimination_order": [encode_element(x) for x in order]})


def cmd_width(args):
    a = _load(args.a)
    r = width.width_report(a, args.max_universe)
    return CommandResult(r.treewidth, r.to_dict(), text=json.dumps(r.to_dict(), indent=1))


def cmd_coalgebra_number(args):
    a = _load(args.a)
    _check_universe(a, args)
    kappa = width.coalgebra_number(a)
    return CommandResult(kappa, width.find_k_traversal(a, kappa).to_dict())


def cmd_pebble_number(args):
    a = _load(args.a)
    return CommandResult(width.pebble_number(a, args.max_universe))


def cmd_traversal(args):
    a = _load(args.a)
    _check_universe(a, args)
    t = width.find_k_traversal(a, args.k)
    return CommandResult(t is not None, None if t is None else t.to_dict())


def cmd_laws(args):
    a = _load(args.a)
    r = comonad.check_comonad_laws(a, args.k, args.depth, max_plays=args.max_plays)
    witness = {"checked": r.checked}
    if r.counterexample:
        law, where, detail = r.counterexample
        witness["counterexample"] = {"law": law, "at": repr(where), "detail": detail}
    return CommandResult(r.passed, witness)


def cmd_decomp_tk(args):
    a = _load(args.a)
    _, rep = comonad.tree_decomposition_tk(a, args.k, args.depth, args.max_plays)
    witness = {
        "width": rep["width"],
        "max_bag": rep["max_bag"],
        "uncovered": len(rep["uncovered"]),
        "disconnected": len(rep["disconnected"]),
    }
    return CommandResult(rep["valid"], witness)


def cmd_transducer(args):
    a, b = _load(args.a), _load(args.b)
    structures.require_same_signature(a, b)
    s = games.existential_strategy(a, b, args.k)
    if s is None:
        return CommandResult(False, None)
    doc = games.determinize(s, explore=False).to_dict(args.max_plays)
    if args.out:
        Path(args.out).write_text(json.dumps(doc) + "\n")
        return CommandResult(True, {"states": len(doc["states"]), "out": args.out})
    return CommandResult(True, doc, text=json.dumps(doc))


def cmd_gen(args):
    return _structure_result(constructions.generate(args.kind, args.n), args)


def cmd_z2(args):
    return _structure_result(constructions.z2(), args)


def cmd_mermin(args):
    return _structure_result(constructions.mermin(), args)


def cmd_sys2str(args):
    return _structure_result(constructions.system_to_structure(_load_system(args.system)), args)


def cmd_cfi(args):
    a = constructions.system_to_structure(_load_system(args.system))
    pair = constructions.cfi_pair(a)
    z = constructions.z2()
    checks = {
        "a_to_a0": structures.is_homomorphism(pair.embedding, a, pair.a0),
        "a1_to_z2": structures.is_homomorphism(pair.projection, pair.a1, z),
        "a0_to_z2": structures.find_homomorphism(pair.a0, z) is not None,
        "isomorphic": structures.is_isomorphic(pair.a0, pair.a1),
        "bijection_equiv": games.bijection_game_equiv(pair.a0, pair.a1, args.k),
    }
    report = constructions.cfi_witness_iso(a, args.k, depth=args.depth, max_plays=args.max_plays)
    witness = dict(checks)
    witness["witness_iso"] = report.to_dict()
    return CommandResult(report.valid and checks["bijection_equiv"], witness)


def cmd_nogo(args):
    r = constructions.nogo_demo(args.m)
    return CommandResult(r.holds, r.to_dict())


def cmd_eval(args):
    a = _load(args.a)
    try:
        f = logic.load(args.formula)
    except FileNotFoundError:
        raise PebblingError(f"no such file: {args.formula}") from None
    logic.check_formula(f, a.signature)
    tup = tuple(x for x in args.tuple.split(",") if x) if args.tuple else ()
    for x in tup:
        if x not in a:
            raise PebblingError(f"{x!r} is not an element of {args.a}")
    if isinstance(f, logic.Box):
        v = logic.eval_box(a, tup, f, max_plays=args.max_plays)
    else:
        env = {i + 1: x for i, x in enumerate(tup)}
        v = logic.evaluate(a, env, f, max_plays=args.max_plays)
    return CommandResult(v)


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print the full result as JSON")
    common.add_argument("--max-plays", type=int, default=comonad.DEFAULT_MAX_PLAYS, help="cap on bounded play fragments")
    common.add_argument("--max-universe", type=int, default=width.DEFAULT_MAX_UNIVERSE, help="cap for exponential width algorithms")

    p = argparse.ArgumentParser(prog="pebbling", description="Pebble games, the pebbling comonad and width invariants.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help, *args):
        sp = sub.add_parser(name, parents=[common], help=help)
        for arg in args:
            sp.add_argument(arg)
        sp.set_defaults(func=func)
        return sp

    def pebbles(sp):
        sp.add_argument("--k", type=int, required=True)
        return sp

    add("hom", cmd_hom, "find a homomorphism A -> B", "a", "b")
    add("iso", cmd_iso, "decide isomorphism", "a", "b")
    add("core", cmd_core, "compute the core", "a")
    pebbles(add("consistency", cmd_consistency, "existential k-pebble game A -> B", "a", "b"))
    add("consistency-number", cmd_consistency_number, "largest k with A ->_k B", "a", "b")
    sp = pebbles(add("equiv", cmd_equiv, "k-pebble equivalence", "a", "b"))
    sp.add_argument("--game", choices=("ep", "bf", "bij"), required=True)
    add("treewidth", cmd_treewidth, "exact treewidth by subset DP", "a")
    add("width", cmd_width, "treewidth, coalgebra and pebble numbers with witnesses", "a")
    add("coalgebra-number", cmd_coalgebra_number, "least k admitting a k-traversal", "a")
    add("pebble-number", cmd_pebble_number, "treewidth of the core plus one", "a")
    pebbles(add("traversal", cmd_traversal, "search for a k-traversal", "a"))
    sp = pebbles(add("laws", cmd_laws, "check the comonad laws on bounded plays", "a"))
    sp.add_argument("--depth", type=int, required=True)
    sp = pebbles(add("decomp-tk", cmd_decomp_tk, "validate the active-prefix tree decomposition", "a"))
    sp.add_argument("--depth", type=int, required=True)
    sp = pebbles(add("transducer", cmd_transducer, "export a deterministic strategy", "a", "b"))
    sp.add_argument("--out")
    sp = add("gen", cmd_gen, "generate a standard structure", "kind")
    sp.add_argument("n", type=int)
    sp.add_argument("--out")
    add("z2", cmd_z2, "the parity template").add_argument("--out")
    add("mermin", cmd_mermin, "the magic-square parity system").add_argument("--out")
    add("sys2str", cmd_sys2str, "convert a parity system file to a structure", "system").add_argument("--out")
    sp = pebbles(add("cfi", cmd_cfi, "check the CFI pair of a parity system", "system"))
    sp.add_argument("--depth", type=int, default=4)
    sp = add("nogo", cmd_nogo, "no-go demonstration for the 3-cycle")
    sp.add_argument("--m", type=int, required=True)
    sp = add("eval", cmd_eval, "evaluate a formula file", "a")
    sp.add_argument("--formula", required=True)
    sp.add_argument("--tuple", help="comma-separated elements bound to x1, x2, ...")
    return p


def _render(result: CommandResult) -> str:
    if result.text is not None:
        return result.text
    v = result.verdict
    if isinstance(v, bool):
        return "yes" if v else "no"
    return str(v)


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    start = time.perf_counter()
    try:
        result = args.func(args)
    except (PebblingError, ValueError) as exc:
        print(f"error: {exc}", file=stderr)
        return 2
    result.timing_ms = (time.perf_counter() - start) * 1000
    if args.json:
        print(json.dumps(result.to_dict()), file=stdout)
    else:
        print(_render(result), file=stdout)
    if isinstance(result.verdict, bool):
        return 0 if result.verdict else 1
    return 0


def main() -> None:
    sys.exit(run())
