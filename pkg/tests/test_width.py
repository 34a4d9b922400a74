import json

import pytest
from hypothesis import given

from corpus import random_graphs
from oracles import traversal_ok, treewidth_by_orders
from test_structures import binary_structure, graph

from pebbling.comonad import coalgebra_of_traversal
from pebbling.constructions import complete, cycle, grid, mermin, path, symmetric_cycle
from pebbling.errors import SizeCapExceeded
from pebbling.structures import core, gaifman
from pebbling.width import (
    coalgebra_number,
    find_k_traversal,
    pebble_number,
    treewidth_oracle,
    treewidth_with_order,
    width_report,
)


def test_find_k_traversal_examples():
    one = graph(["x"], [])
    t = find_k_traversal(one, 1)
    assert t is not None and t.label == {"x": 1}
    assert find_k_traversal(complete(3), 2) is None
    assert find_k_traversal(complete(3), 3) is not None
    assert find_k_traversal(path(5), 2) is not None
    assert find_k_traversal(complete(3), 0) is None


def test_coalgebra_number_examples():
    assert coalgebra_number(complete(4)) == 4
    assert coalgebra_number(symmetric_cycle(6)) == 3
    assert coalgebra_number(graph(["x"], [])) == 1


def test_treewidth_examples():
    assert treewidth_oracle(graph([str(i) for i in range(5)], [])) == 0
    assert treewidth_oracle(complete(4)) == 3
    assert treewidth_oracle(grid(3)) == treewidth_by_orders(grid(3)) == 3


def test_mermin_treewidth():
    assert treewidth_oracle(mermin()) == treewidth_by_orders(mermin()) == 5
    assert core(mermin()) == mermin()


def test_treewidth_cap():
    with pytest.raises(SizeCapExceeded):
        treewidth_oracle(path(21))
    assert treewidth_oracle(path(4), max_universe=4) == 1


def test_pebble_number_examples():
    assert pebble_number(complete(3)) == 3
    assert pebble_number(symmetric_cycle(4)) == 2
    assert pebble_number(graph(["x"], [])) == 1


def _elimination_width(s, order):
    g = gaifman(s)
    w = 0
    for v in order:
        nb = list(g.neighbors(v))
        w = max(w, len(nb))
        for x in nb:
            for y in nb:
                if x != y:
                    g.add_edge(x, y)
        g.remove_node(v)
    return w


def test_dp_matches_brute_force_orders():
    for g in random_graphs(count=25, max_n=6, seed=99):
        tw, order = treewidth_with_order(g)
        assert tw == treewidth_by_orders(g)
        assert sorted(order) == sorted(g.universe)
        assert _elimination_width(g, order) == tw


@given(binary_structure(5))
def test_kappa_is_treewidth_plus_one(a):
    kappa = coalgebra_number(a)
    assert kappa - 1 == treewidth_oracle(a)
    t = find_k_traversal(a, kappa)
    assert t.violations() == []
    assert traversal_ok(a, kappa, dict(t.parent), dict(t.label))
    coalgebra_of_traversal(t)


@given(binary_structure(4))
def test_pi_at_most_kappa(a):
    assert pebble_number(a) <= coalgebra_number(a)


def test_width_report_json():
    r = width_report(cycle(5))
    doc = json.loads(json.dumps(r.to_dict()))
    assert doc["treewidth"] == 2 and doc["kappa"] == 3 and doc["pi"] == 3
    tr = doc["traversal"]
    assert len(tr["parent"]) == len(tr["labels"]) == 5
    assert sum(p is None for p in tr["parent"]) >= 1
    assert sorted(doc["elimination_order"]) == sorted(cycle(5).universe)
