import numpy as np
import pytest

from pairfl.generator import GenParams, gen_transit_stub, sample_cf
from pairfl.graph import symmetric_network
from pairfl.rng import SplitMix64
from pairfl.triples import (
    MODES,
    TripleSet,
    brute_force_triples,
    dump_triples,
    gen_path_disjoint,
    gen_set_disjoint,
    generate_triples,
    load_triples,
    triple_stats,
)

from netgen import random_digraph, random_symmetric


def test_star_gives_triple():
    net = symmetric_network(3, [(0, 1), (0, 2)], [0], [0, 1, 2])
    assert (0, 1, 2) in gen_set_disjoint(net)


def test_shared_first_hop_gives_no_triple():
    # c=0 reaches everything through x=1
    net = symmetric_network(4, [(0, 1), (1, 2), (1, 3)], [0], [0, 2, 3])
    for mode in MODES:
        assert len(generate_triples(net, mode)) == 0


def test_diamond_both_path_modes():
    net = symmetric_network(5, [(0, 1), (1, 3), (0, 2), (2, 4)], [0], [0, 3, 4])
    for mode in MODES:
        assert (0, 3, 4) in generate_triples(net, mode)


def test_shared_midpoint_separates_arc_and_vertex_modes():
    # 0 -> {1,2} -> 3 -> {4,5}: every path passes vertex 3, but arc-disjoint pairs exist
    net = symmetric_network(6, [(0, 1), (0, 2), (1, 3), (2, 3), (3, 4), (3, 5)], [0], [0, 4, 5])
    assert (0, 4, 5) in gen_path_disjoint(net, "arc")
    assert (0, 4, 5) not in gen_path_disjoint(net, "vertex")
    assert (0, 4, 5) not in gen_set_disjoint(net)
    for mode in MODES:
        assert generate_triples(net, mode).as_set() == brute_force_triples(net, mode).as_set()


def test_triangle_all_triples():
    net = symmetric_network(3, [(0, 1), (1, 2), (0, 2)], [0, 1, 2])
    ts = gen_set_disjoint(net)
    assert ts.as_set() == {(0, 1, 2), (1, 0, 2), (2, 0, 1)}
    assert brute_force_triples(net, "set").as_set() == ts.as_set()
    st = triple_stats(ts, net)
    assert (st.count, st.possible, st.percent) == (3, 3, 100.0)


def test_stats_empty_customers():
    net = symmetric_network(3, [(0, 1), (1, 2)], [], [0, 1, 2])
    st = triple_stats(gen_set_disjoint(net), net)
    assert (st.count, st.possible, st.percent) == (0, 0, 0.0)


@pytest.mark.parametrize("seed", range(60))
def test_oracle_and_chain(seed):
    net = random_digraph(seed, n_max=9) if seed % 3 == 0 else random_symmetric(seed, n_max=11)
    found = {m: generate_triples(net, m).as_set() for m in MODES}
    for m in MODES:
        assert found[m] == brute_force_triples(net, m).as_set(), m
    assert found["set"] <= found["path-vertex"] <= found["path-arc"]


def test_brute_force_size_cap():
    net = random_symmetric(1, n_min=15, n_max=15)
    with pytest.raises(ValueError):
        brute_force_triples(net, "set")


def test_storage_invariants():
    net = random_symmetric(7, n_min=10)
    ts = gen_path_disjoint(net, "vertex")
    rows = ts.by_customer
    assert np.all(rows[:, 1] < rows[:, 2])
    for c, a, b in ts:
        assert c in net.customers and a in net.facilities and b in net.facilities
        assert c not in (a, b)
    key = lambda arr: sorted(map(tuple, arr.tolist()))
    assert key(ts.by_customer) == key(ts.by_min) == key(ts.by_max)
    for f in net.facilities:
        got = ts.for_facility(f)
        assert np.all((got[:, 1] == f) | (got[:, 2] == f))
        assert len(got) == sum(1 for t in ts if f in t[1:])
    for c in net.customers:
        assert len(ts.for_customer(c)) == sum(1 for t in ts if t[0] == c)


def test_two_pass_and_determinism():
    base = gen_transit_stub(GenParams(1, 2, 3, 4, seed=3))
    net = sample_cf(base, 1, 1, SplitMix64(3))
    for mode in MODES:
        one = generate_triples(net, mode)
        two = generate_triples(net, mode, two_pass=True)
        assert one.digest == two.digest == generate_triples(net, mode).digest


def test_dump_load_round_trip():
    net = random_symmetric(11)
    ts = gen_set_disjoint(net)
    again = load_triples(dump_triples(ts), net.vertex_count)
    assert again.digest == ts.digest and again.mode == ts.mode
    with pytest.raises(ValueError):
        load_triples(dump_triples(ts).replace(f"set {len(ts)}", f"set {len(ts) + 1}"), net.vertex_count)


def test_from_array_rejects_unordered():
    with pytest.raises(ValueError):
        TripleSet.from_array("set", 3, np.array([[0, 2, 1]]))


def test_percentage_band_on_generated_class():
    # the reference transit-stub 50-vertex (C1,F1) average is about 22%; our generator differs
    pcts = []
    for seed in range(5):
        net = sample_cf(gen_transit_stub(GenParams(1, 2, 3, 8, seed=seed)), 1, 1, SplitMix64(seed))
        pcts.append(triple_stats(gen_set_disjoint(net), net).percent)
    assert 22.0 - 15 <= sum(pcts) / len(pcts) <= 22.0 + 15
