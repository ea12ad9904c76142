"""Polynomial special cases and structural bounds on undirected networks.

Covers the tree optimum, the 2-connected decomposition with its block-cut
tree, the lower bound from the unconstrained path-disjoint problem (paths
need not be shortest), and the two worst-case fixtures for the bounds.
"""

from __future__ import annotations

from dataclasses import dataclass

from .graph import InstanceError, Network, check_symmetric, symmetric_network, undirected_edges


class FixtureError(RuntimeError):
    """A fixture failed its own defining-property check."""


def _adjacency(vertices, edges) -> dict[int, set[int]]:
    adj: dict[int, set[int]] = {v: set() for v in vertices}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    return adj


def _require_symmetric(net: Network) -> None:
    ok, bad = check_symmetric(net)
    if not ok:
        raise InstanceError(f"network is not symmetric, e.g. arc {bad[0]}")


# ---------------------------------------------------------------------------
# trees


def is_tree(net: Network) -> bool:
    """Underlying undirected graph is a tree (the network is strongly connected)."""
    return len(undirected_edges(net)) == net.vertex_count - 1


def _prune_leaves(adj: dict[int, set[int]], keep: set[int]) -> None:
    """Delete degree-<=1 vertices outside ``keep`` until none is left."""
    stack = [v for v in adj if len(adj[v]) <= 1 and v not in keep]
    while stack:
        v = stack.pop()
        if v not in adj or len(adj[v]) > 1 or v in keep or len(adj) == 1:
            continue
        for u in adj.pop(v):
            adj[u].discard(v)
            if len(adj[u]) <= 1 and u not in keep:
                stack.append(u)


def tree_optimum(net: Network) -> tuple[int, ...]:
    """Minimum cover of a tree network: prune non-customer leaves, take the leaves left.

    On trees shortest paths are unique, so this is optimal for both the
    set- and path-disjoint problems.
    """
    _require_symmetric(net)
    if not is_tree(net):
        raise InstanceError("underlying graph is not a tree")
    if not net.customers:
        return ()
    adj = _adjacency(range(net.vertex_count), undirected_edges(net))
    _prune_leaves(adj, set(net.customers))
    if len(adj) == 1:
        return tuple(adj)
    return tuple(sorted(v for v in adj if len(adj[v]) == 1))


# ---------------------------------------------------------------------------
# 2-connected components


@dataclass(frozen=True)
class BlockTree:
    """2-connected components, bridges, articulation points and the block-cut tree.

    ``components`` are the maximal 2-connected vertex sets (at least three
    vertices); ``component_edges`` their edge sets.  Tree nodes are
    ``("v", x)`` for a vertex that is an articulation point or lies in no
    component, and ``("C", k)`` for component k.
    """

    components: tuple[frozenset[int], ...]
    component_edges: tuple[frozenset[tuple[int, int]], ...]
    bridges: tuple[tuple[int, int], ...]
    articulation_points: frozenset[int]
    tree_nodes: tuple[tuple[str, int], ...]
    tree_edges: tuple[tuple[tuple[str, int], tuple[str, int]], ...]

    def node_of(self, v: int) -> tuple[str, int]:
        if v in self.articulation_points:
            return ("v", v)
        for k, comp in enumerate(self.components):
            if v in comp:
                return ("C", k)
        return ("v", v)

    def internal(self, k: int) -> frozenset[int]:
        return self.components[k] - self.articulation_points

    def leaf_components(self) -> list[int]:
        return [k for k, c in enumerate(self.components) if len(c & self.articulation_points) == 1]


def _blocks(adj: dict[int, set[int]]) -> tuple[list[set[tuple[int, int]]], set[int]]:
    """Edge blocks and articulation points by the iterative lowpoint DFS."""
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    blocks: list[set[tuple[int, int]]] = []
    arts: set[int] = set()
    counter = 0
    for root in sorted(adj):
        if root in index:
            continue
        index[root] = low[root] = counter
        counter += 1
        children = 0
        edge_stack: list[tuple[int, int]] = []
        stack = [(root, -1, iter(sorted(adj[root])))]
        while stack:
            v, parent, it = stack[-1]
            advanced = False
            for w in it:
                if w == parent:
                    continue
                if w not in index:
                    edge_stack.append((v, w))
                    index[w] = low[w] = counter
                    counter += 1
                    if v == root:
                        children += 1
                    stack.append((w, v, iter(sorted(adj[w]))))
                    advanced = True
                    break
                if index[w] < index[v]:
                    edge_stack.append((v, w))
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            stack.pop()
            if parent >= 0:
                low[parent] = min(low[parent], low[v])
                if low[v] >= index[parent]:
                    if parent != root:
                        arts.add(parent)
                    block = set()
                    while True:
                        e = edge_stack.pop()
                        block.add((min(e), max(e)))
                        if e == (parent, v):
                            break
                    blocks.append(block)
        if children > 1:
            arts.add(root)
    return blocks, arts


def biconnected_components(net: Network) -> BlockTree:
    """Decompose the undirected view of a symmetric network."""
    _require_symmetric(net)
    return _block_tree(_adjacency(range(net.vertex_count), undirected_edges(net)))


def _block_tree(adj: dict[int, set[int]]) -> BlockTree:
    blocks, arts = _blocks(adj)
    comps, comp_edges, bridges = [], [], []
    for b in blocks:
        if len(b) == 1:
            bridges.append(next(iter(b)))
        else:
            comp_edges.append(frozenset(b))
            comps.append(frozenset(x for e in b for x in e))
    order = sorted(range(len(comps)), key=lambda k: min(comps[k]))
    comps = [comps[k] for k in order]
    comp_edges = [comp_edges[k] for k in order]
    owner = {}
    for k, c in enumerate(comps):
        for x in c - arts:
            owner[x] = k
    nodes = [("v", x) for x in sorted(adj) if x not in owner]
    nodes += [("C", k) for k in range(len(comps))]

    def node(x: int) -> tuple[str, int]:
        return ("C", owner[x]) if x in owner else ("v", x)

    tedges = set()
    for u, v in bridges:
        tedges.add(tuple(sorted((node(u), node(v)))))
    for k, c in enumerate(comps):
        for a in sorted(c & arts):
            tedges.add(tuple(sorted((("v", a), ("C", k)))))
    return BlockTree(
        tuple(comps),
        tuple(comp_edges),
        tuple(sorted(bridges)),
        frozenset(arts),
        tuple(nodes),
        tuple(sorted(tedges)),
    )


# ---------------------------------------------------------------------------
# unconstrained path-disjoint bound


@dataclass(frozen=True)
class UpdflResult:
    value: int
    cover: tuple[int, ...]
    residual: frozenset[int]


def updfl_lower_bound(net: Network) -> UpdflResult:
    """Optimum when paths need only be vertex-disjoint, not shortest.

    Prunes non-customer leaves and leaf components without an internal
    customer.  If what is left is 2-connected the answer is one customer
    (if there is just one) or any two; otherwise it is every leaf plus the
    lowest-id internal customer of each leaf component.  Any path-disjoint
    cover is also a cover here, so the value bounds that optimum from below.
    """
    _require_symmetric(net)
    customers = set(net.customers)
    if not customers:
        raise InstanceError("no customers")
    adj = _adjacency(range(net.vertex_count), undirected_edges(net))
    while True:
        _prune_leaves(adj, customers)
        if len(adj) <= 2:
            break
        bt = _block_tree(adj)
        doomed: set[int] = set()
        for k in bt.leaf_components():
            inner = bt.internal(k)
            if not inner & customers:
                doomed |= inner
        if not doomed:
            break
        for v in doomed:
            for u in adj.pop(v):
                if u in adj:
                    adj[u].discard(v)
    residual = frozenset(adj)
    if len(adj) == 1:
        cover = tuple(adj)
        return UpdflResult(1, cover, residual)
    leaves = sorted(v for v in adj if len(adj[v]) == 1)
    bt = _block_tree(adj)
    leaf_comps = bt.leaf_components()
    if not leaves and not leaf_comps:
        inside = sorted(customers & residual)
        cover = tuple(inside[:2])
        return UpdflResult(len(cover), cover, residual)
    picks = {min(bt.internal(k) & customers) for k in leaf_comps}
    cover = tuple(sorted(set(leaves) | picks))
    return UpdflResult(len(cover), cover, residual)


# ---------------------------------------------------------------------------
# worst-case fixtures


def build_fig4_fixture(n: int, validate: bool = True) -> Network:
    """Family where the hitting-set bound is 3 but the optimum is n.

    Customers c_1..c_n are vertices 0..n-1, each joined to the three
    neighbor vertices v_1, v_2, v_3 (ids n..n+2).  Facility f_j (id n+3+j)
    is joined to the two v's other than v_j, so from every customer
    N(c, f_j) misses exactly v_j.  Any two of f_1, f_2, f_3 share a
    neighbor, and paths to another customer use all three, so only
    self-cover works.  Unit weights; the v's are neither customers nor
    facilities.
    """
    if n < 4:
        raise ValueError("n must be at least 4")
    vs = [n, n + 1, n + 2]
    fs = [n + 3, n + 4, n + 5]
    edges = [(c, v) for c in range(n) for v in vs]
    for j, f in enumerate(fs):
        edges += [(f, v) for i, v in enumerate(vs) if i != j]
    net = symmetric_network(n + 6, edges, range(n), list(range(n)) + fs)
    if validate:
        _check_fig4(net, n, fs)
    return net


def _check_fig4(net: Network, n: int, fs: list[int]) -> None:
    from .exact import solve_exact
    from .hitting import build_hslb_instance, exact_hitting_set
    from .scp import ScpInstance
    from .triples import generate_triples

    inst = ScpInstance.from_network(net, generate_triples(net, "set"))
    hs = exact_hitting_set(build_hslb_instance(net), inst)
    if hs.value != 3 or sorted(hs.members) != fs or hs.feasible:
        raise FixtureError(f"hitting-set bound is {hs.value} with witness {hs.members}, expected 3 = {fs}")
    opt = solve_exact(inst)
    if not opt.optimal or opt.size != n:
        raise FixtureError(f"optimum is {opt.size} ({opt.status}), expected {n}")


def build_fig5_fixture(N: int, validate: bool = True) -> Network:
    """2-connected family with bound 2 but path-disjoint optimum N.

    Vertex 0 is the top customer and 1 the bottom one.  Unit i adds a
    middle customer m_i, a hub h_i joined to top, bottom and m_i, and a
    five-vertex chain from top to m_i (a length-6 path).  Every shortest
    path into m_i from another customer enters through h_i, so each m_i
    can only cover itself, while the length-2 path from the bottom and the
    length-6 chain from the top are disjoint.  7N + 2 vertices.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    top, bottom = 0, 1
    edges = []
    middle = []
    nxt = 2
    for _ in range(N):
        m, h = nxt, nxt + 1
        chain = list(range(nxt + 2, nxt + 7))
        nxt += 7
        middle.append(m)
        edges += [(top, h), (bottom, h), (h, m)]
        path = [top, *chain, m]
        edges += list(zip(path, path[1:]))
    customers = [top, bottom, *middle]
    net = symmetric_network(nxt, edges, customers)
    if validate:
        _check_fig5(net, N, middle)
    return net


def _check_fig5(net: Network, N: int, middle: list[int]) -> None:
    from .triples import generate_triples

    if net.vertex_count != 7 * N + 2:
        raise FixtureError(f"{net.vertex_count} vertices, expected {7 * N + 2}")
    bound = updfl_lower_bound(net)
    if bound.value != 2:
        raise FixtureError(f"unconstrained bound is {bound.value}, expected 2")
    ts = generate_triples(net, "path-vertex")
    for m in middle:
        if len(ts.for_customer(m)):
            raise FixtureError(f"middle customer {m} is covered by a pair")
