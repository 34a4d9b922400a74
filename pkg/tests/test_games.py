import pytest
from hypothesis import given, strategies as st

from oracles import back_and_forth_game, bijection_game, existential_game
from test_structures import binary_structure

from pebbling.comonad import coextend, position_of
from pebbling.constructions import (
    binary_structures,
    complete,
    contradiction_system,
    cycle,
    mermin,
    path,
    system_to_structure,
    z2,
)
from pebbling.errors import PebblingError
from pebbling.games import (
    EMPTY,
    Configuration,
    arrow_k,
    back_and_forth_equiv,
    back_and_forth_strategy,
    bijection_game_equiv,
    consistency_number,
    determinize,
    existential_strategy,
    final_configuration,
    identity_strategy,
    is_winning,
    realize,
    update,
)
from pebbling.structures import find_homomorphism
from pebbling.width import pebble_number


def test_update_examples():
    g = update(EMPTY, 1, "a", "b")
    assert dict(g) == {1: ("a", "b")}
    assert dict(update(g, 1, "a2", "b2")) == {1: ("a2", "b2")}
    assert dict(update(g, 2, "c", "d")) == {1: ("a", "b"), 2: ("c", "d")}
    with pytest.raises(PebblingError):
        update(g, 0, "a", "b")
    with pytest.raises(PebblingError):
        update(g, 3, "a", "b", k=2)


def test_is_winning_examples():
    tri, k2 = complete(3), complete(2)
    assert is_winning(EMPTY, tri, k2)
    assert is_winning(Configuration({1: ("0", "0"), 2: ("1", "1")}), tri, k2)
    assert not is_winning(Configuration({1: ("0", "0"), 2: ("1", "0")}), tri, k2)


def test_is_winning_requires_single_valued():
    k3 = complete(3)
    assert not is_winning(Configuration({1: ("0", "1"), 2: ("0", "2")}), k3, k3)


def test_existential_examples():
    c3 = cycle(3)
    assert existential_strategy(c3, cycle(5), 2) is not None
    assert existential_strategy(c3, path(4), 2) is None
    assert arrow_k(complete(3), complete(2), 2)
    assert arrow_k(complete(3), complete(3), 3)


def test_mermin_game_values():
    # Five pebbles: the returned strategy is checked directly against the
    # strategy conditions.  Six pebbles: the structure's treewidth is 5,
    # so six pebbles already decide homomorphism existence, which fails.
    a, b = mermin(), z2()
    s = existential_strategy(a, b, 5)
    assert s is not None and s.violations() == []
    assert pebble_number(a) == 6
    assert not arrow_k(a, b, 6)
    assert not arrow_k(a, b, 8)
    assert not arrow_k(a, b, 9)
    assert consistency_number(a, b) == 5


def test_consistency_number_examples():
    a = system_to_structure(contradiction_system())
    assert consistency_number(a, z2()) == 2
    sat = system_to_structure(type(contradiction_system())(("x", "y", "z"), (("x", "y", "z", 1),)))
    assert consistency_number(sat, z2()) == 3


def test_back_and_forth_examples():
    k3, k4 = complete(3), complete(4)
    assert back_and_forth_equiv(k3, k4, 3)
    assert not back_and_forth_equiv(k3, k4, 4)
    assert back_and_forth_equiv(k3, k3, 3)
    assert back_and_forth_game(k3, k4, 3) is True


def test_back_and_forth_strategy_is_closed_under_reversal():
    s = back_and_forth_strategy(complete(3), complete(4), 3)
    assert s is not None
    # every position is a partial isomorphism, so the reversed family is well defined
    for pos in s.positions:
        inv = {y: x for x, y in pos}
        assert len(inv) == len(pos)


def test_bijection_examples():
    assert not bijection_game_equiv(complete(3), complete(4), 3)
    assert bijection_game_equiv(cycle(4), cycle(4), 2)
    # one pebble sees only loops, and neither structure has any
    assert bijection_game_equiv(cycle(3), path(3), 1) == bijection_game(cycle(3), path(3), 1) is True
    assert bijection_game_equiv(cycle(3), path(3), 2) == bijection_game(cycle(3), path(3), 2) is False


def test_bijection_distinguishes_where_back_and_forth_does_not():
    # a 6-cycle and two triangles agree on 2-variable logic but not on counting
    from pebbling.constructions import GRAPH
    from pebbling.structures import Structure

    two = Structure(GRAPH, [str(i) for i in range(6)],
                    {"E": [(str(x), str(y)) for x, y in [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]]})
    six = cycle(6)
    assert back_and_forth_equiv(two, six, 2) == back_and_forth_game(two, six, 2) is True
    assert bijection_game_equiv(two, six, 2) == bijection_game(two, six, 2) is True
    assert bijection_game_equiv(two, six, 3) == bijection_game(two, six, 3) is False


SMALL = [s for n in (1, 2, 3) for s in binary_structures(n)]


@pytest.mark.parametrize("k", [1, 2])
def test_symmetric_games_match_indexed_oracle(k):
    for a in SMALL:
        for b in SMALL:
            assert back_and_forth_equiv(a, b, k) == back_and_forth_game(a, b, k)
            assert bijection_game_equiv(a, b, k) == bijection_game(a, b, k)


def test_symmetric_games_match_oracle_k3_sampled():
    import random

    rng = random.Random(7)
    for _ in range(300):
        a, b = rng.choice(SMALL), rng.choice(SMALL)
        assert back_and_forth_equiv(a, b, 3) == back_and_forth_game(a, b, 3)
        assert bijection_game_equiv(a, b, 3) == bijection_game(a, b, 3)


def test_equivalence_chain_exhaustive():
    for k in (1, 2, 3):
        for a in SMALL:
            for b in SMALL:
                if bijection_game_equiv(a, b, k):
                    assert back_and_forth_equiv(a, b, k)
                if back_and_forth_equiv(a, b, k):
                    assert arrow_k(a, b, k) and arrow_k(b, a, k)


@given(binary_structure(), binary_structure(), st.integers(2, 4))
def test_grading_monotone(a, b, k):
    if arrow_k(a, b, k):
        assert all(arrow_k(a, b, l) for l in range(1, k))


@given(binary_structure(), binary_structure())
def test_collapse_at_cardinality(a, b):
    k = len(a.universe)
    assert arrow_k(a, b, k) == (find_homomorphism(a, b) is not None)


@given(binary_structure(3), binary_structure(3), st.integers(1, 3))
def test_existential_matches_oracle(a, b, k):
    assert arrow_k(a, b, k) == existential_game(a, b, k)


@given(binary_structure(3), binary_structure(3))
def test_pebble_number_bound_implies_homomorphism(a, b):
    if pebble_number(a) <= consistency_number(a, b):
        assert find_homomorphism(a, b) is not None


# -- determinization ---------------------------------------------------------


def _all_plays(universe, k, length):
    from itertools import product

    moves = [(p, x) for p in range(1, k + 1) for x in universe]
    for n in range(1, length + 1):
        yield from product(moves, repeat=n)


def test_determinize_c3_into_c5():
    s = existential_strategy(cycle(3), cycle(5), 2)
    t = determinize(s)
    states, delta = t.explore()
    # states are pebble-indexed configurations over 3 x 5 pairs
    assert len(states) <= (3 * 5 + 1) ** 2
    assert all(st.relation() in s.positions for st in states)
    assert all(is_winning(st, cycle(3), cycle(5)) for st in states)
    # total: one transition per state and input
    assert len(delta) == len(states) * 2 * 3


def test_determinize_identity_copies():
    k3 = complete(3)
    t = determinize(identity_strategy(k3, 3))
    for play in _all_plays(k3.universe, 3, 3):
        assert realize(t, play) == play


def test_determinize_singleton_two_states():
    from pebbling.constructions import GRAPH
    from pebbling.structures import Structure

    one = Structure(GRAPH, ["x"], {"E": []})
    t = determinize(identity_strategy(one, 1))
    states, _ = t.explore()
    assert len(states) == 2


def test_realize_single_step_and_range():
    s = existential_strategy(cycle(3), cycle(5), 2)
    t = determinize(s, explore=False)
    b, _ = t.step(EMPTY, 1, "0")
    assert realize(t, [(1, "0")]) == ((1, b),)
    with pytest.raises(PebblingError):
        realize(t, [(3, "0")])


def test_realize_soundness_and_coextension():
    a, b = cycle(3), cycle(5)
    t = determinize(existential_strategy(a, b, 2), explore=False)

    def f(play):
        return realize(t, play)[-1][1]

    for play in _all_plays(a.universe, 2, 4):
        out = realize(t, play)
        assert out == coextend(f, play)
        g = position_of(play, out)
        assert is_winning(g, a, b)
        assert g == final_configuration(t, play)


def test_mermin_transducer_on_long_play():
    a, b = mermin(), z2()
    t = determinize(existential_strategy(a, b, 5), explore=False)
    play = [(1, "A"), (2, "B"), (3, "C"), (4, "F"), (5, "I"), (1, "D"), (2, "E"), (3, "G")]
    out = realize(t, play)

    def f(s):
        return realize(t, s)[-1][1]

    assert len(out) == 8
    assert is_winning(position_of(tuple(play), out), a, b)
    assert out == coextend(f, tuple(play))


def test_transducer_export_shape():
    t = determinize(existential_strategy(cycle(3), cycle(4), 2))
    doc = t.to_dict()
    assert doc["k"] == 2 and doc["initial"] == 0 and doc["states"][0] == {}
    for i, p, x, y, j in doc["delta"]:
        assert 0 <= i < len(doc["states"]) and 0 <= j < len(doc["states"])
        assert doc["states"][j][str(p)] == [x, y]
