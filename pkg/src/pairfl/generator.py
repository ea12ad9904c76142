"""Synthetic transit-stub networks, gravity demands and customer/facility sampling."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .graph import Network, symmetric_network
from .rng import SplitMix64

WEIGHT_MODES = ("unit", "uniform_1_30")

# |V| -> (T, N_T, S, N_S) for the size classes of the transit-stub experiments
SIZE_CLASSES = {
    50: (1, 2, 3, 8),
    100: (1, 4, 3, 8),
    190: (2, 5, 3, 6),
    220: (2, 5, 3, 7),
    250: (2, 5, 3, 8),
    300: (2, 6, 3, 8),
    984: (4, 6, 4, 10),
}


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class GenParams:
    T: int
    NT: int
    S: int
    NS: int
    p_transit: float = 0.6
    p_stub: float = 0.42
    mean_inter: float = 2.0
    weights: str = "unit"
    seed: int = 0
    max_attempts: int = 1000

    def __post_init__(self) -> None:
        for name in ("T", "NT", "S", "NS"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        for name in ("p_transit", "p_stub"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.weights not in WEIGHT_MODES:
            raise ValueError(f"weight mode must be one of {WEIGHT_MODES}")

    @property
    def vertex_count(self) -> int:
        return self.T * self.NT * (1 + self.S * self.NS)


def _connected(vertices: list[int], edges) -> bool:
    if len(vertices) <= 1:
        return True
    adj: dict[int, list[int]] = {v: [] for v in vertices}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    seen = {vertices[0]}
    stack = [vertices[0]]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(vertices)


def _random_domain(vertices: list[int], p: float, rng: SplitMix64, limit: int, what: str) -> list[tuple[int, int]]:
    """Edges among ``vertices``, each present with probability p, redrawn until connected."""
    pairs = [(u, v) for i, u in enumerate(vertices) for v in vertices[i + 1 :]]
    for _ in range(limit):
        edges = [e for e in pairs if rng.random() < p]
        if _connected(vertices, edges):
            return edges
    raise GenerationError(f"{what}: no connected draw in {limit} attempts")


def gen_transit_stub(params: GenParams) -> Network:
    """Transit-stub topology with unset customers and facilities.

    Transit vertices come first (ids ``0..T*N_T-1``), then each transit
    vertex's S stub domains of N_S vertices in order.
    """
    rng = SplitMix64(params.seed)
    T, NT, S, NS = params.T, params.NT, params.S, params.NS
    n_transit = T * NT
    limit = params.max_attempts

    assign = rng.derive("transit-domains")
    domain_of = [i if i < T else assign.below(T) for i in range(n_transit)]
    domains = [[v for v in range(n_transit) if domain_of[v] == d] for d in range(T)]

    edges: set[tuple[int, int]] = set()
    inter = rng.derive("inter-domain")
    n_inter = max(T - 1, round(params.mean_inter * T / 2)) if T > 1 else 0
    for attempt in range(limit + 1):
        if attempt == limit:
            raise GenerationError(f"transit domains: not connected after {limit} attempts")
        links: set[tuple[int, int]] = set()
        dom_links = []
        tries = 0
        while len(links) < n_inter and tries < 100 * n_inter:
            tries += 1
            a, b = inter.sample(range(T), 2)
            u, v = inter.choice(domains[a]), inter.choice(domains[b])
            e = (min(u, v), max(u, v))
            if e not in links:
                links.add(e)
                dom_links.append((a, b))
        if _connected(list(range(T)), dom_links):
            edges |= links
            break

    intra = rng.derive("intra-domain")
    for d, members in enumerate(domains):
        edges.update(_random_domain(members, params.p_transit, intra, limit, f"transit domain {d}"))

    nxt = n_transit
    for t in range(n_transit):
        for s in range(S):
            members = list(range(nxt, nxt + NS))
            nxt += NS
            edges.update(_random_domain(members, params.p_stub, intra, limit, f"stub domain {t}.{s}"))
            edges.add((t, intra.choice(members)))

    weight = rng.derive("weights")
    weighted = []
    for u, v in sorted(edges):
        w = 1 if params.weights == "unit" else 1 + weight.below(30)
        weighted.append((u, v, w))
    return symmetric_network(nxt, weighted, (), ())


def average_degree(net: Network) -> float:
    return len(net.arcs) / net.vertex_count


# ---------------------------------------------------------------------------
# demands


def hop_distances(net: Network, source: int) -> list[int]:
    dist = [-1] * net.vertex_count
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v, _ in net.out_arcs[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def gravity(r, o, d, D, dmax):
    """t = r * o * d * exp(-D / Dmax)."""
    return r * o * d * np.exp(-np.asarray(D, dtype=float) / dmax)


@dataclass(frozen=True)
class DemandMatrix:
    t: np.ndarray
    origin: np.ndarray
    destination: np.ndarray
    r: np.ndarray
    hops: np.ndarray
    dmax: int


def gravitational_demands(net: Network, rng: SplitMix64) -> DemandMatrix:
    """Random gravity-model demands; D is the hop distance, Dmax the hop diameter."""
    n = net.vertex_count
    hops = np.array([hop_distances(net, s) for s in range(n)], dtype=np.int64)
    dmax = max(1, int(hops.max()))
    o = np.array([rng.random() for _ in range(n)])
    d = np.array([rng.random() for _ in range(n)])
    r = np.array([[rng.random() for _ in range(n)] for _ in range(n)])
    t = gravity(r, o[:, None], d[None, :], hops, dmax)
    np.fill_diagonal(t, 0.0)
    return DemandMatrix(t, o, d, r, hops, int(hops.max()))


def dump_demands(dm: DemandMatrix) -> str:
    n = len(dm.t)
    lines = [f"d {u} {v} {dm.t[u, v]:.9g}" for u in range(n) for v in range(n) if u != v]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# customers and facilities


def class_sizes(n: int, x: int, y: int) -> tuple[int, int]:
    """(|C|, |F|) = (ceil(n/x), ceil(n/y)) for class (Cx,Fy)."""
    if y < 1 or x < y:
        raise ValueError("class (Cx,Fy) needs x >= y >= 1")
    return math.ceil(n / x), math.ceil(n / y)


def sample_cf(net: Network, x: int, y: int, rng: SplitMix64) -> Network:
    """Facilities uniform from V, customers uniform from the facilities."""
    nc, nf = class_sizes(net.vertex_count, x, y)
    facilities = rng.sample(range(net.vertex_count), nf)
    customers = rng.sample(facilities, nc)
    return net.with_classes(customers, facilities)


def parse_class(text: str) -> tuple[int, int]:
    """``"C2,F1"`` -> (2, 1)."""
    try:
        c, f = (p.strip().upper() for p in text.split(","))
        if not (c.startswith("C") and f.startswith("F")):
            raise ValueError
        x, y = int(c[1:]), int(f[1:])
        class_sizes(1, x, y)
    except ValueError:
        raise ValueError(f"bad class {text!r}, expected e.g. C2,F1 with x >= y >= 1") from None
    return x, y
