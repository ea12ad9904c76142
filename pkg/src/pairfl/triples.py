"""Derived cover-by-pairs triples (c, f1, f2) for a network.

Three notions of "{f1, f2} covers c":

``set``
    no shortest c->f1 path shares a vertex other than c with any shortest
    c->f2 path.  By the first-hop lemma this holds iff N(c,f1) and N(c,f2)
    are disjoint, so one pass over c's shortest-path DAG suffices.
``path-vertex`` / ``path-arc``
    some shortest c->f1 path and some shortest c->f2 path are vertex
    (arc) disjoint.  Decided per (c, f1) by routing one unit of flow to f1
    and running one residual BFS that answers every f2 at once.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator

import numpy as np

from .graph import Network, neighbor_masks, shortest_path_dag, ShortestPathDag

MODES = ("set", "path-vertex", "path-arc")
BRUTE_FORCE_MAX_VERTICES = 14


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")


@dataclass(frozen=True)
class TripleSet:
    """Triples (c, f1, f2) with f1 < f2, kept in three sort orders.

    ``by_customer`` is sorted by (c, f1, f2), ``by_min`` by (f1, c, f2) and
    ``by_max`` by (f2, c, f1).  ``*_start[k]`` is the first row whose key is
    vertex ``k``; the rows for ``k`` end at ``*_start[k + 1]``.
    """

    mode: str
    vertex_count: int
    by_customer: np.ndarray
    by_min: np.ndarray = field(repr=False)
    by_max: np.ndarray = field(repr=False)
    customer_start: np.ndarray = field(repr=False)
    min_start: np.ndarray = field(repr=False)
    max_start: np.ndarray = field(repr=False)

    @classmethod
    def from_array(cls, mode: str, vertex_count: int, rows: np.ndarray) -> "TripleSet":
        _check_mode(mode)
        rows = np.asarray(rows, dtype=np.int64).reshape(-1, 3)
        if len(rows) and np.any(rows[:, 1] >= rows[:, 2]):
            raise ValueError("triples must satisfy f1 < f2")

        def sorted_copy(key_cols: tuple[int, int, int]) -> tuple[np.ndarray, np.ndarray]:
            # lexsort takes the primary key last
            order = np.lexsort((rows[:, key_cols[2]], rows[:, key_cols[1]], rows[:, key_cols[0]]))
            copy = rows[order]
            counts = np.bincount(copy[:, key_cols[0]], minlength=vertex_count)
            start = np.zeros(vertex_count + 1, dtype=np.int64)
            np.cumsum(counts, out=start[1:])
            return copy, start

        by_c, cs = sorted_copy((0, 1, 2))
        by_min, mins = sorted_copy((1, 0, 2))
        by_max, maxs = sorted_copy((2, 0, 1))
        return cls(mode, vertex_count, by_c, by_min, by_max, cs, mins, maxs)

    def __len__(self) -> int:
        return len(self.by_customer)

    def __iter__(self) -> Iterator[tuple[int, int, int]]:
        for c, a, b in self.by_customer.tolist():
            yield (c, a, b)

    def __contains__(self, t: tuple[int, int, int]) -> bool:
        c, a, b = t
        if a > b:
            a, b = b, a
        rows = self.for_customer(c)
        return bool(np.any((rows[:, 1] == a) & (rows[:, 2] == b)))

    def as_set(self) -> set[tuple[int, int, int]]:
        return set(iter(self))

    def for_customer(self, c: int) -> np.ndarray:
        return self.by_customer[self.customer_start[c] : self.customer_start[c + 1]]

    def for_facility(self, f: int) -> np.ndarray:
        """Every triple naming ``f`` as one of its two facilities."""
        lo = self.by_min[self.min_start[f] : self.min_start[f + 1]]
        hi = self.by_max[self.max_start[f] : self.max_start[f + 1]]
        return np.concatenate([lo, hi])

    @cached_property
    def digest(self) -> bytes:
        return self.by_customer.astype("<i8").tobytes()


def _set_disjoint_rows(net: Network, c: int, facilities: list[int], dag: ShortestPathDag) -> np.ndarray:
    neighbors = [v for v, _ in net.out_arcs[c]]
    masks = neighbor_masks(dag, neighbors)
    fs = [f for f in facilities if f != c]
    if len(fs) < 2:
        return np.empty((0, 3), dtype=np.int64)
    # membership matrix over c's out-neighbors; intersection sizes by one product
    member = np.zeros((len(fs), len(neighbors)), dtype=np.float32)
    for i, f in enumerate(fs):
        m = masks[f]
        j = 0
        while m:
            if m & 1:
                member[i, j] = 1.0
            m >>= 1
            j += 1
    overlap = member @ member.T
    i1, i2 = np.nonzero(np.triu(overlap == 0, k=1))
    fa = np.asarray(fs, dtype=np.int64)
    out = np.empty((len(i1), 3), dtype=np.int64)
    out[:, 0] = c
    out[:, 1] = fa[i1]
    out[:, 2] = fa[i2]
    return out


def _lex_smallest_path(dag: ShortestPathDag, target: int) -> list[int]:
    """Shortest source->target path, lexicographically smallest by vertex id."""
    can = dag.reaching(target)
    path = [dag.source]
    v = dag.source
    while v != target:
        v = min(x for x in dag.succ[v] if x in can)
        path.append(v)
    return path


def _path_disjoint_rows(
    net: Network, c: int, facilities: list[int], dag: ShortestPathDag, vertex: bool
) -> np.ndarray:
    n = net.vertex_count
    fs = [f for f in facilities if f != c]
    rows: list[tuple[int, int, int]] = []
    # Node numbering: arc mode uses v itself.  Vertex mode splits v into
    # v_in = v and v_out = v + n joined by an arc of capacity one; the
    # source is c_out and DAG arcs (u, v) become (u_out, v_in).
    if vertex:
        size = 2 * n
        base = [[] for _ in range(size)]
        for u, v in dag.dag_arcs:
            base[u + n].append(v)
        for v in range(n):
            if v != c:
                base[v].append(v + n)
        source = c + n

        def out_node(v: int) -> int:
            return v + n

    else:
        size = n
        base = [list(dag.succ[v]) for v in range(n)]
        source = c

        def out_node(v: int) -> int:
            return v

    for f1 in fs:
        path = _lex_smallest_path(dag, f1)
        flow_arcs: list[tuple[int, int]] = []
        if vertex:
            for u, v in zip(path, path[1:]):
                flow_arcs.append((u + n, v))
                flow_arcs.append((v, v + n))
        else:
            flow_arcs = list(zip(path, path[1:]))
        saturated = set(flow_arcs)
        back: dict[int, list[int]] = {}
        for u, v in flow_arcs:
            back.setdefault(v, []).append(u)
        seen = bytearray(size)
        seen[source] = 1
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for v in base[u]:
                if not seen[v] and (u, v) not in saturated:
                    seen[v] = 1
                    queue.append(v)
            for v in back.get(u, ()):
                if not seen[v]:
                    seen[v] = 1
                    queue.append(v)
        for f2 in fs:
            if f2 > f1 and seen[out_node(f2)]:
                rows.append((c, f1, f2))
    # f2 > f1 only: the relation is symmetric, and pairs are recorded once
    return np.asarray(rows, dtype=np.int64).reshape(-1, 3)


def _customer_rows(net: Network, c: int, mode: str) -> np.ndarray:
    dag = shortest_path_dag(net, c)
    facilities = list(net.facilities)
    if mode == "set":
        return _set_disjoint_rows(net, c, facilities, dag)
    return _path_disjoint_rows(net, c, facilities, dag, vertex=(mode == "path-vertex"))


def generate_triples(net: Network, mode: str, two_pass: bool = False) -> TripleSet:
    """Triples of ``net`` under ``mode``, customers processed in increasing id.

    With ``two_pass`` the generator runs twice: once to count, once to fill
    a buffer of exactly that size (trading time for peak memory).
    """
    _check_mode(mode)
    if not two_pass:
        parts = [_customer_rows(net, c, mode) for c in net.customers]
        rows = np.concatenate(parts) if parts else np.empty((0, 3), dtype=np.int64)
        return TripleSet.from_array(mode, net.vertex_count, rows)
    total = sum(len(_customer_rows(net, c, mode)) for c in net.customers)
    rows = np.empty((total, 3), dtype=np.int64)
    pos = 0
    for c in net.customers:
        part = _customer_rows(net, c, mode)
        if pos + len(part) > total:
            raise RuntimeError("second pass produced more triples than counted")
        rows[pos : pos + len(part)] = part
        pos += len(part)
    if pos != total:
        raise RuntimeError(f"second pass wrote {pos} triples, counted {total}")
    return TripleSet.from_array(mode, net.vertex_count, rows)


def gen_set_disjoint(net: Network, two_pass: bool = False) -> TripleSet:
    return generate_triples(net, "set", two_pass)


def gen_path_disjoint(net: Network, disjointness: str = "vertex", two_pass: bool = False) -> TripleSet:
    if disjointness not in ("vertex", "arc"):
        raise ValueError("disjointness must be 'vertex' or 'arc'")
    return generate_triples(net, f"path-{disjointness}", two_pass)


# ---------------------------------------------------------------------------
# exhaustive oracle


def bellman_ford(net: Network, source: int) -> list[float]:
    dist = [float("inf")] * net.vertex_count
    dist[source] = 0
    for _ in range(net.vertex_count - 1):
        changed = False
        for u, v, w in net.arcs:
            if dist[u] + w < dist[v]:
                dist[v] = dist[u] + w
                changed = True
        if not changed:
            break
    return dist


def all_shortest_paths(net: Network, source: int) -> dict[int, list[tuple[int, ...]]]:
    """Every shortest path from ``source``, grouped by endpoint.

    Distances come from Bellman-Ford; paths are enumerated by depth-first
    extension along arcs that keep every prefix shortest.
    """
    dist = bellman_ford(net, source)
    paths: dict[int, list[tuple[int, ...]]] = {v: [] for v in range(net.vertex_count)}
    stack: list[tuple[int, ...]] = [(source,)]
    while stack:
        p = stack.pop()
        u = p[-1]
        paths[u].append(p)
        for v, w in net.out_arcs[u]:
            if dist[u] + w == dist[v]:
                stack.append(p + (v,))
    return paths


def brute_force_triples(net: Network, mode: str) -> TripleSet:
    """Triples straight from the definition, by enumerating shortest paths."""
    _check_mode(mode)
    if net.vertex_count > BRUTE_FORCE_MAX_VERTICES:
        raise ValueError(
            f"brute force limited to {BRUTE_FORCE_MAX_VERTICES} vertices (got {net.vertex_count})"
        )
    rows = []
    for c in net.customers:
        paths = all_shortest_paths(net, c)
        fs = [f for f in net.facilities if f != c]
        vsets = {f: [frozenset(p[1:]) for p in paths[f]] for f in fs}
        asets = {f: [frozenset(zip(p, p[1:])) for p in paths[f]] for f in fs}
        for i, f1 in enumerate(fs):
            for f2 in fs[i + 1 :]:
                if mode == "set":
                    ok = all(not (a & b) for a in vsets[f1] for b in vsets[f2])
                elif mode == "path-vertex":
                    ok = any(not (a & b) for a in vsets[f1] for b in vsets[f2])
                else:
                    ok = any(not (a & b) for a in asets[f1] for b in asets[f2])
                if ok:
                    rows.append((c, f1, f2))
    return TripleSet.from_array(mode, net.vertex_count, np.asarray(rows, dtype=np.int64))


# ---------------------------------------------------------------------------
# statistics and dump format


@dataclass(frozen=True)
class TripleStats:
    count: int
    possible: int
    percent: float

    def __str__(self) -> str:
        return f"triples={self.count} possible={self.possible} percent={self.percent:.2f}"


def triple_stats(ts: TripleSet, net: Network) -> TripleStats:
    nc, nf = len(net.customers), len(net.facilities)
    possible = nc * (nf - 1) * (nf - 2) // 2 if nf >= 2 else 0
    percent = 100.0 * len(ts) / possible if possible else 0.0
    return TripleStats(len(ts), possible, percent)


def dump_triples(ts: TripleSet) -> str:
    lines = [f"p triples {ts.mode} {len(ts)}"]
    lines.extend(f"t {c} {a} {b}" for c, a, b in ts)
    return "\n".join(lines) + "\n"


def load_triples(text: str, vertex_count: int) -> TripleSet:
    mode = None
    expected = 0
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if tok[0] == "p" and len(tok) == 4 and tok[1] == "triples":
            mode, expected = tok[2], int(tok[3])
        elif tok[0] == "t" and len(tok) == 4:
            rows.append(tuple(int(x) for x in tok[1:]))
        else:
            raise ValueError(f"line {lineno}: unrecognised {line!r}")
    if mode is None:
        raise ValueError("missing 'p triples' line")
    if len(rows) != expected:
        raise ValueError(f"header declares {expected} triples, found {len(rows)}")
    return TripleSet.from_array(mode, vertex_count, np.asarray(rows, dtype=np.int64))
