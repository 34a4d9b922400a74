import pytest

from pebbling.constructions import (
    PARITY,
    Z2System,
    binary_structures,
    cfi_pair,
    cfi_witness_iso,
    cfi_witness_map,
    check_cfi_pair,
    complete,
    contradiction_system,
    cycle,
    generate,
    grid,
    mermin,
    mermin_system,
    nogo_chain,
    nogo_demo,
    path,
    symmetric_cycle,
    system_to_structure,
    z2,
)
from pebbling.errors import PebblingError, StructureError
from pebbling.games import bijection_game_equiv, determinize, existential_strategy
from pebbling.structures import find_homomorphism, is_homomorphism, is_isomorphic


def test_generate_examples():
    c3 = generate("cycle", 3)
    assert c3.relations["E"] == {("0", "1"), ("1", "2"), ("2", "0")}
    assert len(generate("complete", 3).relations["E"]) == 6
    p4 = generate("path", 4)
    assert len(p4.relations["E"]) == 3
    assert find_homomorphism(cycle(3), p4) is None
    assert len(symmetric_cycle(4).relations["E"]) == 8
    assert len(grid(2, 3).relations["E"]) == 2 * 7


def test_generate_errors():
    with pytest.raises(StructureError):
        generate("wheel", 3)
    with pytest.raises(StructureError):
        generate("cycle", 2)
    with pytest.raises(StructureError):
        generate("complete", 0)


def test_binary_structures_counts():
    # known counts of digraphs with loops up to isomorphism: 2, 10, 104
    assert [len(binary_structures(n)) for n in (1, 2, 3)] == [2, 10, 104]
    assert len(binary_structures(2, up_to_isomorphism=False)) == 16


def test_z2_relations():
    z = z2()
    assert z.universe == ("0", "1")
    assert len(z.relations["R0"]) == len(z.relations["R1"]) == 4
    assert ("0", "0", "0") in z.relations["R0"]
    assert ("1", "1", "1") in z.relations["R1"]
    assert ("0", "1", "1") in z.relations["R0"]


def test_system_to_structure_examples():
    one = system_to_structure(Z2System(("x", "y", "z"), (("x", "y", "z", 0),)))
    assert one.relations["R0"] == {("x", "y", "z")} and not one.relations["R1"]
    assert find_homomorphism(one, z2()) is not None
    assert find_homomorphism(system_to_structure(contradiction_system()), z2()) is None


def test_system_validation():
    with pytest.raises(StructureError):
        Z2System(("x", "x"))
    with pytest.raises(StructureError):
        Z2System(("x", "y", "z"), (("x", "y", "w", 0),))
    with pytest.raises(StructureError):
        Z2System(("x", "y", "z"), (("x", "y", "z", 2),))
    with pytest.raises(StructureError):
        Z2System.from_dict({"variables": ["x"]})
    s = mermin_system()
    assert Z2System.from_dict(s.to_dict()) == s


def test_mermin_table():
    a = mermin()
    assert len(a.universe) == 9
    assert len(a.relations["R0"]) == 5
    assert a.relations["R1"] == {("C", "F", "I")}
    assert find_homomorphism(a, z2()) is None


def test_cfi_pair_examples():
    a = system_to_structure(contradiction_system())
    pair = cfi_pair(a)
    assert len(pair.a0.universe) == len(pair.a1.universe) == 6
    assert is_homomorphism(pair.embedding, a, pair.a0)
    assert is_homomorphism(pair.projection, pair.a1, z2())
    assert find_homomorphism(pair.a0, z2()) is None
    assert not is_isomorphic(pair.a0, pair.a1)
    assert check_cfi_pair(pair)
    assert bijection_game_equiv(pair.a0, pair.a1, 2)
    with pytest.raises(StructureError):
        cfi_pair(cycle(3))


def test_cfi_pair_satisfiable_projection():
    a = system_to_structure(Z2System(("x", "y", "z"), (("x", "y", "z", 1),)))
    pair = cfi_pair(a)
    assert find_homomorphism(pair.a0, z2()) is not None
    assert is_homomorphism(pair.projection, pair.a1, z2())


def test_cfi_witness_map_shifts_tags():
    a = system_to_structure(contradiction_system())
    pair = cfi_pair(a)
    t = determinize(existential_strategy(a, z2(), 2), explore=False)
    f = cfi_witness_map(pair, t)
    s = ((1, ("x", 0)), (2, ("y", 1)))
    out = f(s)
    assert [p for p, _ in out] == [1, 2]
    assert [x for _, (x, _) in out] == ["x", "y"]


def test_cfi_witness_contradiction_k2():
    r = cfi_witness_iso(system_to_structure(contradiction_system()), 2, depth=4)
    assert r.valid and r.bijective and r.counterexample is None
    assert r.to_dict()["valid"]


def test_cfi_witness_mermin_k3_non_vacuous():
    # three pebbles can hold a whole equation, so relation tuples exist
    r = cfi_witness_iso(mermin(), 3, depth=3)
    assert r.tuples > 0
    assert r.valid


def test_cfi_witness_requires_strategy():
    with pytest.raises(PebblingError):
        cfi_witness_iso(system_to_structure(contradiction_system()), 3, depth=2)


@pytest.mark.parametrize("m", [3, 4, 5, 6])
def test_nogo_demo(m):
    r = nogo_demo(m)
    assert r.cycle and not r.path and r.chain_linked and r.holds
    assert r.to_dict()["holds"]


def test_nogo_chain_and_errors():
    chain = nogo_chain(3)
    assert chain == [((1, "0"),), ((1, "0"), (2, "1")), ((1, "0"), (2, "1"), (1, "2"))]
    with pytest.raises(StructureError):
        nogo_demo(2)


def test_parity_signature():
    assert mermin().signature == PARITY == z2().signature
    assert complete(2).signature != PARITY
    assert path(2).signature == complete(2).signature
