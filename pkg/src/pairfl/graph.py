"""Weighted digraphs, instance files and shortest-path DAGs."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence


class InstanceError(ValueError):
    """An instance file or network that cannot be used."""


class ParseError(InstanceError):
    def __init__(self, lineno: int, message: str) -> None:
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class InvariantError(InstanceError):
    """A well-formed network that breaks a structural requirement.

    ``kind`` is one of ``vertex-range``, ``self-loop``, ``duplicate-arc``,
    ``non-positive weight``, ``customers-not-facilities`` or
    ``not strongly connected``.
    """

    def __init__(self, kind: str, detail: str = "") -> None:
        super().__init__(f"{kind}: {detail}" if detail else kind)
        self.kind = kind


Arc = tuple[int, int, int]


@dataclass(frozen=True, eq=True)
class Network:
    """Strongly connected digraph with customers C and facilities F, C <= F."""

    vertex_count: int
    arcs: tuple[Arc, ...]
    customers: tuple[int, ...] = ()
    facilities: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "arcs", tuple(sorted((int(u), int(v), int(w)) for u, v, w in self.arcs)))
        object.__setattr__(self, "customers", tuple(sorted(int(c) for c in self.customers)))
        object.__setattr__(self, "facilities", tuple(sorted(int(f) for f in self.facilities)))
        self._validate()

    def _validate(self) -> None:
        n = self.vertex_count
        if n < 1:
            raise InvariantError("vertex-range", "vertex_count must be positive")
        seen = set()
        for u, v, w in self.arcs:
            if not (0 <= u < n and 0 <= v < n):
                raise InvariantError("vertex-range", f"arc ({u},{v})")
            if u == v:
                raise InvariantError("self-loop", f"arc ({u},{v})")
            if (u, v) in seen:
                raise InvariantError("duplicate-arc", f"arc ({u},{v})")
            if w < 1:
                raise InvariantError("non-positive weight", f"arc ({u},{v}) has weight {w}")
            seen.add((u, v))
        for name, ids in (("customers", self.customers), ("facilities", self.facilities)):
            if len(set(ids)) != len(ids):
                raise InvariantError("vertex-range", f"duplicate id among {name}")
            for x in ids:
                if not 0 <= x < n:
                    raise InvariantError("vertex-range", f"{name} id {x}")
        missing = set(self.customers) - set(self.facilities)
        if missing:
            raise InvariantError("customers-not-facilities", f"{sorted(missing)[:5]}")
        if not self._strongly_connected():
            raise InvariantError("not strongly connected")

    def _strongly_connected(self) -> bool:
        def reach(adj: list[list[int]]) -> int:
            seen = [False] * self.vertex_count
            seen[0] = True
            stack = [0]
            count = 1
            while stack:
                u = stack.pop()
                for v in adj[u]:
                    if not seen[v]:
                        seen[v] = True
                        count += 1
                        stack.append(v)
            return count

        fwd: list[list[int]] = [[] for _ in range(self.vertex_count)]
        rev: list[list[int]] = [[] for _ in range(self.vertex_count)]
        for u, v, _ in self.arcs:
            fwd[u].append(v)
            rev[v].append(u)
        return reach(fwd) == self.vertex_count and reach(rev) == self.vertex_count

    @cached_property
    def out_arcs(self) -> list[list[tuple[int, int]]]:
        """``out_arcs[u]`` lists ``(v, w)`` in increasing ``v``."""
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.vertex_count)]
        for u, v, w in self.arcs:
            adj[u].append((v, w))
        return adj

    @cached_property
    def weight(self) -> dict[tuple[int, int], int]:
        return {(u, v): w for u, v, w in self.arcs}

    def with_classes(self, customers: Iterable[int], facilities: Iterable[int]) -> "Network":
        return Network(self.vertex_count, self.arcs, tuple(customers), tuple(facilities))


def load_network(text: str) -> Network:
    """Parse the line-oriented instance format.

    ::

        p dpfl <vertex_count> <arc_count>
        a <tail> <head> <weight>
        c <id> ...
        f <id> ...

    Anything after ``#`` is ignored.
    """
    header = None
    arcs: list[Arc] = []
    customers: list[int] | None = None
    facilities: list[int] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        try:
            if tok[0] == "p":
                if header is not None:
                    raise ParseError(lineno, "duplicate problem line")
                if len(tok) != 4 or tok[1] != "dpfl":
                    raise ParseError(lineno, "expected 'p dpfl <vertex_count> <arc_count>'")
                header = (int(tok[2]), int(tok[3]))
            elif header is None:
                raise ParseError(lineno, "problem line must come first")
            elif tok[0] == "a":
                if len(tok) != 4:
                    raise ParseError(lineno, "expected 'a <tail> <head> <weight>'")
                arcs.append((int(tok[1]), int(tok[2]), int(tok[3])))
            elif tok[0] == "c":
                if customers is not None:
                    raise ParseError(lineno, "duplicate customer line")
                customers = [int(x) for x in tok[1:]]
            elif tok[0] == "f":
                if facilities is not None:
                    raise ParseError(lineno, "duplicate facility line")
                facilities = [int(x) for x in tok[1:]]
            else:
                raise ParseError(lineno, f"unknown line type {tok[0]!r}")
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(lineno, f"bad integer in {line!r}") from None
    if header is None:
        raise ParseError(0, "missing problem line")
    if len(arcs) != header[1]:
        raise ParseError(0, f"header declares {header[1]} arcs, found {len(arcs)}")
    return Network(header[0], tuple(arcs), tuple(customers or ()), tuple(facilities or ()))


def dump_network(net: Network, comments: Sequence[str] = ()) -> str:
    lines = [f"# {c}" for c in comments]
    lines.append(f"p dpfl {net.vertex_count} {len(net.arcs)}")
    lines.extend(f"a {u} {v} {w}" for u, v, w in net.arcs)
    lines.append(" ".join(["c", *map(str, net.customers)]))
    lines.append(" ".join(["f", *map(str, net.facilities)]))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ShortestPathDag:
    source: int
    dist: tuple[int, ...]
    dag_arcs: tuple[tuple[int, int], ...]
    succ: tuple[tuple[int, ...], ...] = field(repr=False)
    pred: tuple[tuple[int, ...], ...] = field(repr=False)

    @cached_property
    def order(self) -> tuple[int, ...]:
        """Vertices by (distance, id): a topological order of the DAG."""
        return tuple(sorted(range(len(self.dist)), key=lambda v: (self.dist[v], v)))

    def reaching(self, target: int) -> set[int]:
        """Vertices with a DAG path to ``target`` (``target`` included)."""
        seen = {target}
        stack = [target]
        while stack:
            v = stack.pop()
            for u in self.pred[v]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        return seen


def dijkstra(net: Network, source: int) -> list[int]:
    inf = float("inf")
    dist: list = [inf] * net.vertex_count
    dist[source] = 0
    heap = [(0, source)]
    adj = net.out_arcs
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, w in adj[u]:
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def shortest_path_dag(net: Network, source: int) -> ShortestPathDag:
    if not 0 <= source < net.vertex_count:
        raise ValueError(f"no vertex {source}")
    dist = dijkstra(net, source)
    succ: list[list[int]] = [[] for _ in range(net.vertex_count)]
    pred: list[list[int]] = [[] for _ in range(net.vertex_count)]
    dag = []
    for u, v, w in net.arcs:
        if dist[u] + w == dist[v]:
            dag.append((u, v))
            succ[u].append(v)
            pred[v].append(u)
    return ShortestPathDag(
        source,
        tuple(int(d) for d in dist),
        tuple(dag),
        tuple(map(tuple, succ)),
        tuple(map(tuple, pred)),
    )


@dataclass(frozen=True)
class NeighborSets:
    """N(c) and, for every facility f != c, the neighbors N(c,f) on shortest c->f paths."""

    customer: int
    neighbors: tuple[int, ...]
    sets: dict[int, frozenset[int]]
    masks: dict[int, int] = field(repr=False)
    dag: ShortestPathDag = field(repr=False)

    def __getitem__(self, f: int) -> frozenset[int]:
        return self.sets[f]


def neighbor_masks(dag: ShortestPathDag, neighbors: Sequence[int]) -> list[int]:
    """Per-vertex bitmask over ``neighbors`` (bit i <-> neighbors[i]).

    Bit i of entry v is set iff neighbors[i] lies on some shortest
    source->v path, i.e. v is reachable in the DAG through the first arc
    (source, neighbors[i]).  Computed by one sweep in topological order.
    """
    c = dag.source
    local = {x: i for i, x in enumerate(neighbors)}
    masks = [0] * len(dag.dist)
    for v in dag.order:
        if v == c:
            continue
        m = 0
        for u in dag.pred[v]:
            m |= (1 << local[v]) if u == c else masks[u]
        masks[v] = m
    return masks


def neighbor_sets(net: Network, c: int, dag: ShortestPathDag | None = None) -> NeighborSets:
    if dag is None:
        dag = shortest_path_dag(net, c)
    neighbors = tuple(v for v, _ in net.out_arcs[c])
    masks = neighbor_masks(dag, neighbors)
    sets = {}
    mdict = {}
    for f in net.facilities:
        if f == c:
            continue
        m = masks[f]
        mdict[f] = m
        sets[f] = frozenset(x for i, x in enumerate(neighbors) if m >> i & 1)
    return NeighborSets(c, neighbors, sets, mdict, dag)


def check_symmetric(net: Network) -> tuple[bool, list[Arc]]:
    """True iff every arc (a,b,w) has a partner (b,a,w); also the offending arcs."""
    weight = net.weight
    bad = [(u, v, w) for u, v, w in net.arcs if weight.get((v, u)) != w]
    return not bad, bad


def undirected_edges(net: Network) -> list[tuple[int, int]]:
    """Edges {u,v}, u < v, of a symmetric network."""
    return sorted({(min(u, v), max(u, v)) for u, v, _ in net.arcs})


def symmetric_network(
    n: int,
    edges: Iterable[tuple[int, int] | tuple[int, int, int]],
    customers: Iterable[int] = (),
    facilities: Iterable[int] | None = None,
) -> Network:
    """Network with both directions of each undirected edge (default weight 1).

    ``facilities`` defaults to the customers.
    """
    arcs = []
    for e in edges:
        u, v = e[0], e[1]
        w = e[2] if len(e) > 2 else 1
        arcs.append((u, v, w))
        arcs.append((v, u, w))
    customers = tuple(customers)
    return Network(n, tuple(arcs), customers, tuple(customers if facilities is None else facilities))
