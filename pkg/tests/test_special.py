import networkx as nx
import pytest

from pairfl.exact import brute_force_optimum, solve_exact
from pairfl.graph import InstanceError, symmetric_network, undirected_edges
from pairfl.scp import ScpInstance, minimalize, validate_cover
from pairfl.special import (
    biconnected_components,
    build_fig4_fixture,
    build_fig5_fixture,
    is_tree,
    tree_optimum,
    updfl_lower_bound,
)
from pairfl.triples import generate_triples

from netgen import random_symmetric, random_tree


def instance(net, mode="path-vertex"):
    return ScpInstance.from_network(net, generate_triples(net, mode))


def components_after_removal(vertices, edges, gone):
    g = nx.Graph()
    g.add_nodes_from(v for v in vertices if v != gone)
    g.add_edges_from(e for e in edges if gone not in e)
    return nx.number_connected_components(g)


def test_tree_examples():
    path = symmetric_network(3, [(0, 1), (1, 2)], [0, 1, 2])
    assert tree_optimum(path) == (0, 2)
    star = symmetric_network(5, [(0, 1), (0, 2), (0, 3), (0, 4)], [0], range(5))
    assert tree_optimum(star) == (0,)
    assert tree_optimum(symmetric_network(1, [], [0])) == (0,)


def test_tree_rejects_cycle():
    tri = symmetric_network(3, [(0, 1), (1, 2), (0, 2)], [0, 1])
    assert not is_tree(tri)
    with pytest.raises(InstanceError):
        tree_optimum(tri)


@pytest.mark.parametrize("seed", range(120))
def test_tree_optimum_oracle(seed):
    net = random_tree(seed)
    inst = instance(net)
    opt = tree_optimum(net)
    assert len(opt) == len(brute_force_optimum(inst))
    idx = inst.indices(opt)
    assert validate_cover(inst, idx)[0]
    assert sorted(minimalize(inst, idx)) == sorted(idx)
    assert set(opt) <= set(net.customers)
    if set(net.customers) == set(net.facilities):
        assert updfl_lower_bound(net).value == len(opt)


def test_bcc_examples():
    cycle = symmetric_network(5, [(i, (i + 1) % 5) for i in range(5)], [0])
    bt = biconnected_components(cycle)
    assert bt.components == (frozenset(range(5)),) and not bt.articulation_points
    bowtie = symmetric_network(5, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4)], [0])
    bt = biconnected_components(bowtie)
    assert len(bt.components) == 2 and bt.articulation_points == {2}
    path = symmetric_network(3, [(0, 1), (1, 2)], [0])
    bt = biconnected_components(path)
    assert bt.components == () and bt.bridges == ((0, 1), (1, 2))
    assert bt.articulation_points == {1}


@pytest.mark.parametrize("seed", range(60))
def test_bcc_oracles(seed):
    net = random_symmetric(seed, n_max=14, extra=0.12)
    edges = undirected_edges(net)
    vs = range(net.vertex_count)
    bt = biconnected_components(net)
    base = components_after_removal(vs, edges, None)
    arts = {v for v in vs if components_after_removal(vs, edges, v) > base}
    assert bt.articulation_points == arts
    g = nx.Graph(edges)
    blocks = sorted(sorted(c) for c in nx.biconnected_components(g) if len(c) > 2)
    assert sorted(sorted(c) for c in bt.components) == blocks
    # edge reconstruction
    rebuilt = set(bt.bridges)
    for ce in bt.component_edges:
        assert not rebuilt & ce
        rebuilt |= ce
    assert rebuilt == {(min(u, v), max(u, v)) for u, v in edges}
    for i, a in enumerate(bt.components):
        for b in bt.components[i + 1 :]:
            assert len(a & b) <= 1
    t = nx.Graph()
    t.add_nodes_from(bt.tree_nodes)
    t.add_edges_from(bt.tree_edges)
    assert nx.is_tree(t)


def test_updfl_two_connected():
    k4 = symmetric_network(4, [(u, v) for u in range(4) for v in range(u + 1, 4)], [1, 3])
    res = updfl_lower_bound(k4)
    assert res.value == 2 and res.cover == (1, 3)
    one = symmetric_network(3, [(0, 1), (1, 2), (0, 2)], [2])
    assert updfl_lower_bound(one).cover == (2,)


def test_updfl_needs_customers():
    net = symmetric_network(2, [(0, 1)], [], [0, 1])
    with pytest.raises(InstanceError):
        updfl_lower_bound(net)


@pytest.mark.parametrize("seed", range(80))
def test_updfl_below_optimum(seed):
    net = random_symmetric(700 + seed, extra=0.2)
    res = updfl_lower_bound(net)
    assert set(res.cover) <= set(net.customers)
    for mode in ("path-vertex", "set"):
        inst = instance(net, mode)
        try:
            inst.check_feasible()
        except ValueError:
            continue
        assert res.value <= solve_exact(inst).size


@pytest.mark.parametrize("n", [4, 9, 30])
def test_fig4(n):
    net = build_fig4_fixture(n)
    assert net.vertex_count == n + 6
    assert len(net.facilities) == n + 3


def test_fig4_small_n():
    with pytest.raises(ValueError):
        build_fig4_fixture(3)


@pytest.mark.parametrize("N", [2, 3, 4])
def test_fig5(N):
    net = build_fig5_fixture(N)
    assert net.vertex_count == 7 * N + 2
    assert updfl_lower_bound(net).value == 2
    assert not biconnected_components(net).articulation_points
    inst = instance(net)
    res = solve_exact(inst)
    assert res.optimal and res.size >= N
    middle = [c for c in net.customers if c > 1]
    assert set(middle) <= set(inst.labels(res.cover))
