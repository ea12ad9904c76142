import random

import pytest

from pairfl.graph import (
    InvariantError,
    Network,
    ParseError,
    check_symmetric,
    dijkstra,
    dump_network,
    load_network,
    neighbor_sets,
    shortest_path_dag,
    symmetric_network,
)
from pairfl.generator import GenParams, gen_transit_stub, sample_cf
from pairfl.rng import SplitMix64
from pairfl.triples import all_shortest_paths, bellman_ford

from netgen import random_digraph, random_symmetric

CYCLE = """p dpfl 3 3
a 0 1 1
a 1 2 1
a 2 0 1
c 0 1 2
f 0 1 2
"""


def test_load_directed_cycle():
    net = load_network(CYCLE)
    assert net.vertex_count == 3
    assert len(net.arcs) == 3
    assert net.customers == net.facilities == (0, 1, 2)


def test_zero_weight_rejected():
    with pytest.raises(InvariantError) as err:
        load_network(CYCLE.replace("a 1 2 1", "a 1 2 0"))
    assert err.value.kind == "non-positive weight"


@pytest.mark.parametrize(
    "text, kind",
    [
        (CYCLE.replace("c 0 1 2", "c 0 1 2").replace("f 0 1 2", "f 0 1"), "customers-not-facilities"),
        (CYCLE.replace("a 2 0 1", "a 0 2 1"), "not strongly connected"),
        (CYCLE.replace("a 2 0 1", "a 2 2 1"), "self-loop"),
        (CYCLE.replace("a 2 0 1", "a 0 1 5"), "duplicate-arc"),
        (CYCLE.replace("a 2 0 1", "a 2 7 1"), "vertex-range"),
    ],
)
def test_invariant_kinds(text, kind):
    with pytest.raises(InvariantError) as err:
        load_network(text)
    assert err.value.kind == kind


def test_parse_error_has_line_number():
    with pytest.raises(ParseError) as err:
        load_network(CYCLE.replace("a 1 2 1", "a 1 two 1"))
    assert err.value.lineno == 3
    with pytest.raises(ParseError):
        load_network(CYCLE.replace("p dpfl 3 3", "p dpfl 3 4"))
    with pytest.raises(ParseError):
        load_network("a 0 1 1\n")


def test_comments_ignored_and_any_arc_order():
    text = "# header\np dpfl 3 3\na 2 0 1 # back\na 1 2 1\na 0 1 1\nc 0\nf 0 1\n"
    net = load_network(text)
    assert net.arcs == ((0, 1, 1), (1, 2, 1), (2, 0, 1))


def test_generated_round_trip():
    for seed in range(3):
        base = gen_transit_stub(GenParams(1, 2, 3, 8, seed=seed, weights="uniform_1_30"))
        net = sample_cf(base, 2, 1, SplitMix64(seed))
        text = dump_network(net)
        again = load_network(text)
        assert again == net
        assert dump_network(again) == text


def test_dag_path_example():
    net = Network(3, ((0, 1, 2), (1, 2, 3), (2, 0, 1)))
    dag = shortest_path_dag(net, 0)
    assert dag.dist[2] == 5
    assert set(dag.dag_arcs) == {(0, 1), (1, 2)}


def test_dag_diamond_example():
    arcs = ((0, 1, 1), (0, 2, 1), (1, 3, 1), (2, 3, 1), (3, 0, 1))
    net = Network(4, arcs)
    dag = shortest_path_dag(net, 0)
    assert dag.dist[3] == 2
    assert set(dag.dag_arcs) == {(0, 1), (0, 2), (1, 3), (2, 3)}


def test_neighbor_set_examples():
    path = Network(3, ((0, 1, 1), (1, 2, 1), (2, 0, 1)), (0,), (0, 2))
    assert neighbor_sets(path, 0)[2] == {1}
    diamond = Network(4, ((0, 1, 1), (0, 2, 1), (1, 3, 1), (2, 3, 1), (3, 0, 1)), (0,), (0, 3))
    assert neighbor_sets(diamond, 0)[3] == {1, 2}


@pytest.mark.parametrize("seed", range(40))
def test_dag_and_neighbor_sets_match_enumeration(seed):
    net = random_digraph(seed) if seed % 2 else random_symmetric(seed)
    for c in net.customers:
        dag = shortest_path_dag(net, c)
        paths = all_shortest_paths(net, c)
        on_path = {(p[i], p[i + 1]) for ps in paths.values() for p in ps for i in range(len(p) - 1)}
        assert set(dag.dag_arcs) == on_path
        ns = neighbor_sets(net, c, dag)
        for f in net.facilities:
            if f == c:
                continue
            expected = {p[1] for p in paths[f]}
            assert ns[f] == expected
            assert ns[f]
            for x in ns[f]:
                assert dag.dist[x] == net.weight[(c, x)]


@pytest.mark.parametrize("seed", range(30))
def test_dijkstra_matches_bellman_ford(seed):
    net = random_digraph(seed + 100, n_max=20)
    for s in range(net.vertex_count):
        assert dijkstra(net, s) == bellman_ford(net, s)


def test_dag_acyclic():
    net = random_symmetric(5, n_min=12)
    for s in range(net.vertex_count):
        dag = shortest_path_dag(net, s)
        pos = {v: i for i, v in enumerate(dag.order)}
        assert all(pos[u] < pos[v] for u, v in dag.dag_arcs)


def test_check_symmetric():
    net = symmetric_network(3, [(0, 1, 2), (1, 2, 5)], [0, 1])
    assert check_symmetric(net) == (True, [])
    for seed in range(5):
        assert check_symmetric(gen_transit_stub(GenParams(1, 2, 3, 4, seed=seed, weights="uniform_1_30")))[0]


def test_drop_one_reverse_arc():
    # an extra one-way detour keeps the network strongly connected
    arcs = [(0, 1, 1), (1, 0, 1), (1, 2, 1), (2, 1, 1), (2, 0, 3)]
    ok, bad = check_symmetric(Network(3, tuple(arcs)))
    assert not ok and bad == [(2, 0, 3)]
