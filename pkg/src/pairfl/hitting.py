"""Hitting-set machinery for the set-disjoint case.

A facility f "hits" the element (c, x), x an out-neighbor of c, when f is c
or x is not in N(c,f).  Any set-disjoint cover hits every element, so a
minimum hitting set is a lower bound (HSLB) on the optimum.  The same
neighbor sets drive the single and double hitting-set heuristics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .graph import Network, neighbor_sets
from .rng import SplitMix64
from .scp import (
    RunResult,
    ScpInstance,
    best_of,
    coverage,
    greedy_construct,
    minimalize,
    run_iterations,
    MultiResult,
)

EXACT_MAX_FACILITIES = 200


@dataclass(frozen=True, eq=False)
class HittingSetInstance:
    """Elements (c, x) with boolean hitter rows over ``facilities``."""

    elements: tuple[tuple[int, int], ...]
    facilities: tuple[int, ...]
    hitters: np.ndarray = field(repr=False)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    def hitter_labels(self, k: int) -> list[int]:
        return [self.facilities[i] for i in np.flatnonzero(self.hitters[k])]

    @cached_property
    def masks(self) -> list[int]:
        """Hitter sets as Python int bitmasks over facility index."""
        out = []
        for row in self.hitters:
            m = 0
            for i in np.flatnonzero(row):
                m |= 1 << int(i)
            out.append(m)
        return out

    def is_hitting_set(self, chosen: np.ndarray) -> bool:
        return bool(np.all(self.hitters[:, chosen].any(axis=1))) if self.n_elements else True


def build_hslb_instance(net: Network) -> HittingSetInstance:
    fidx = {f: i for i, f in enumerate(net.facilities)}
    elements = []
    rows = []
    for c in net.customers:
        ns = neighbor_sets(net, c)
        for bit, x in enumerate(ns.neighbors):
            row = np.zeros(len(net.facilities), dtype=bool)
            row[fidx[c]] = True
            for f, m in ns.masks.items():
                if not m >> bit & 1:
                    row[fidx[f]] = True
            elements.append((c, x))
            rows.append(row)
    hitters = np.array(rows, dtype=bool).reshape(len(rows), len(net.facilities))
    return HittingSetInstance(tuple(elements), net.facilities, hitters)


def greedy_hitting_set(
    hitters: np.ndarray, rng: SplitMix64 | None = None, initial: list[int] | None = None
) -> list[int]:
    """Greedy hitting set over a boolean (elements x facilities) matrix.

    Adds the facility hitting the most unhit elements; ties uniformly at
    random (lowest index without an ``rng``).  Returned in order of addition.
    """
    chosen: list[int] = list(initial or [])
    if hitters.shape[0] == 0:
        return chosen
    unhit = ~hitters[:, chosen].any(axis=1) if chosen else np.ones(hitters.shape[0], dtype=bool)
    while unhit.any():
        gain = hitters[unhit].sum(axis=0)
        best = gain.max()
        if best == 0:
            raise ValueError("an element has no hitter")
        ties = np.flatnonzero(gain == best)
        f = int(ties[0] if rng is None or len(ties) == 1 else ties[rng.below(len(ties))])
        chosen.append(f)
        unhit &= ~hitters[:, f]
    return chosen


# ---------------------------------------------------------------------------
# exact minimum hitting set


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _packing_bound(elems: list[int]) -> int:
    """Size of a greedily packed family of pairwise-disjoint hitter sets."""
    used = 0
    count = 0
    for m in sorted(elems, key=_popcount):
        if not m & used:
            used |= m
            count += 1
    return count


class _Budget(Exception):
    pass


@dataclass
class HittingResult:
    value: int
    members: list[int]
    optimal: bool
    nodes: int
    lower_bound: int
    feasible: bool = True


def _reduce(elems: list[int], allowed: int) -> tuple[list[int], int, list[int]] | None:
    """Restrict to allowed hitters, take forced facilities, drop dominated rows.

    Returns (remaining elements, allowed mask, forced facility indices) or
    None when some element cannot be hit.
    """
    forced: list[int] = []
    elems = [m & allowed for m in elems]
    while True:
        if any(m == 0 for m in elems):
            return None
        single = next((m for m in elems if m & (m - 1) == 0), None)
        if single is None:
            break
        forced.append(single.bit_length() - 1)
        elems = [m for m in elems if not m & single]
    # a superset row is implied by its subset row
    uniq = sorted(set(elems), key=lambda m: (_popcount(m), m))
    kept: list[int] = []
    for m in uniq:
        if not any(k & m == k for k in kept):
            kept.append(m)
    # a facility whose hit rows are contained in another's is never needed
    cols: dict[int, int] = {}
    for j, m in enumerate(kept):
        x = m
        while x:
            low = x & -x
            f = low.bit_length() - 1
            cols[f] = cols.get(f, 0) | (1 << j)
            x ^= low
    dominated = 0
    items = sorted(cols.items(), key=lambda kv: (-_popcount(kv[1]), kv[0]))
    for i, (f, cf) in enumerate(items):
        for g, cg in items[:i]:
            if not dominated >> g & 1 and cf & cg == cf:
                dominated |= 1 << f
                break
    if dominated:
        kept = [m & ~dominated for m in kept]
        allowed &= ~dominated
        if any(m & (m - 1) == 0 for m in kept):
            sub = _reduce(kept, allowed)
            if sub is None:
                return None
            kept, allowed, more = sub
            forced.extend(more)
    return kept, allowed, forced


def min_hitting_set(
    masks: list[int],
    n_facilities: int,
    forced_in: tuple[int, ...] = (),
    forced_out: tuple[int, ...] = (),
    node_limit: int | None = None,
    incumbent: list[int] | None = None,
) -> HittingResult:
    """Minimum hitting set by depth-first branch and bound.

    Branches over the hitters of a smallest unhit element (include hitter i,
    exclude hitters before it); bounds with the incumbent against the
    chosen count plus a disjoint-element packing.
    """
    allowed = (1 << n_facilities) - 1
    for f in forced_out:
        allowed &= ~(1 << f)
    base = list(forced_in)
    fin = 0
    for f in forced_in:
        fin |= 1 << f
    elems = [m for m in masks if not m & fin]
    best: list[int] | None = None
    if incumbent is not None:
        best = list(incumbent)
    nodes = 0

    root = _reduce(elems, allowed)
    if root is None:
        return HittingResult(0, [], True, 1, 0, feasible=False)
    r_elems, r_allowed, r_forced = root
    root_lb = len(base) + len(r_forced) + _packing_bound(r_elems)

    if best is None:
        # greedy incumbent on the reduced problem
        chosen = list(base) + r_forced
        rest = list(r_elems)
        while rest:
            counts: dict[int, int] = {}
            for m in rest:
                x = m
                while x:
                    low = x & -x
                    f = low.bit_length() - 1
                    counts[f] = counts.get(f, 0) + 1
                    x ^= low
            f = min(counts, key=lambda k: (-counts[k], k))
            chosen.append(f)
            rest = [m for m in rest if not m >> f & 1]
        best = chosen

    def search(chosen: list[int], elems: list[int], allowed: int) -> None:
        nonlocal best, nodes
        nodes += 1
        if node_limit is not None and nodes > node_limit:
            raise _Budget
        red = _reduce(elems, allowed)
        if red is None:
            return
        elems, allowed, forced = red
        chosen = chosen + forced
        if len(chosen) + _packing_bound(elems) >= len(best):
            return
        if not elems:
            best = chosen
            return
        pivot = min(elems, key=lambda m: (_popcount(m), m))
        freq: dict[int, int] = {}
        x = pivot
        while x:
            low = x & -x
            f = low.bit_length() - 1
            freq[f] = sum(1 for m in elems if m >> f & 1)
            x ^= low
        excluded = 0
        for f in sorted(freq, key=lambda k: (-freq[k], k)):
            rest = [m for m in elems if not m >> f & 1]
            search(chosen + [f], rest, allowed & ~excluded)
            excluded |= 1 << f
            if len(chosen) + 1 >= len(best):
                return

    try:
        search(base, elems, allowed)
        optimal = True
    except _Budget:
        optimal = False
    lb = len(best) if optimal else root_lb
    return HittingResult(len(best), sorted(best), optimal, nodes, lb)


@dataclass
class HslbResult:
    value: int
    members: tuple[int, ...]  # vertex ids
    optimal: bool
    feasible: bool | None  # is the hitting set itself a cover?
    lower_bound: int
    nodes: int

    def line(self) -> str:
        flag = "yes" if self.feasible else "no"
        return f"hslb {self.value} feasible={flag}"


def exact_hitting_set(
    hs: HittingSetInstance,
    inst: ScpInstance | None = None,
    node_limit: int | None = None,
) -> HslbResult:
    """Minimum hitting set (the HSLB value), plus its feasibility as a cover."""
    nf = len(hs.facilities)
    if nf > EXACT_MAX_FACILITIES and node_limit is None:
        raise ValueError(
            f"{nf} facilities exceeds the exact hitting-set cap of {EXACT_MAX_FACILITIES}; "
            "export the LP (export_hslb_lp) and use an external MIP solver"
        )
    res = min_hitting_set(hs.masks, nf, node_limit=node_limit)
    members = tuple(hs.facilities[i] for i in res.members)
    feasible = None
    if inst is not None:
        chosen = np.zeros(inst.n_facilities, dtype=bool)
        chosen[inst.indices(members)] = True
        feasible = bool(coverage(inst, chosen).all())
    return HslbResult(res.value, members, res.optimal, feasible, res.lower_bound, res.nodes)


# ---------------------------------------------------------------------------
# goodness


@dataclass(frozen=True)
class GoodnessTable:
    """Good facilities per customer and the neighbor each one routes through.

    f is good for c when f != c and |N(c,f)| == 1.
    """

    good: dict[int, dict[int, int]]  # c -> {f: unique neighbor}
    facilities: tuple[int, ...]

    def good_count(self, c: int) -> int:
        return len(self.good[c])

    def t_good(self, t: int) -> list[int]:
        return [c for c in sorted(self.good) if len(self.good[c]) >= t]

    def counts_by_t(self) -> dict[int, int]:
        """Number of t-good customers for t = 1..|F|."""
        counts = sorted(len(g) for g in self.good.values())
        return {t: sum(1 for k in counts if k >= t) for t in range(1, len(self.facilities) + 1)}


def goodness_table(net: Network) -> GoodnessTable:
    good: dict[int, dict[int, int]] = {}
    for c in net.customers:
        ns = neighbor_sets(net, c)
        row = {}
        for f, s in ns.sets.items():
            if len(s) == 1:
                row[f] = next(iter(s))
        good[c] = row
    return GoodnessTable(good, net.facilities)


# ---------------------------------------------------------------------------
# heuristics


@dataclass(frozen=True)
class _NetTables:
    """Per-network data shared by SHS/DHS iterations (facility-index space)."""

    hs: HittingSetInstance
    goodness: GoodnessTable
    avoid: dict  # (c, x) -> bool row over facilities: x not in N(c,f)


def _tables(inst: ScpInstance) -> _NetTables:
    cached = getattr(inst, "_hitting_tables", None)
    if cached is not None:
        return cached
    net = inst.network
    if net is None or inst.mode != "set":
        raise ValueError("SHS/DHS need a set-disjoint instance built from a network")
    hs = build_hslb_instance(net)
    avoid = {e: hs.hitters[k] for k, e in enumerate(hs.elements)}
    tables = _NetTables(hs, goodness_table(net), avoid)
    object.__setattr__(inst, "_hitting_tables", tables)
    return tables


def shs_iteration(inst: ScpInstance, index: int, seed: int) -> RunResult:
    tabs = _tables(inst)
    rng = SplitMix64(seed)
    x = greedy_hitting_set(tabs.hs.hitters, rng)
    chosen = np.zeros(inst.n_facilities, dtype=bool)
    chosen[x] = True
    built = x
    if not coverage(inst, chosen).all():
        built = greedy_construct(inst, rng=rng, initial=x)
    delete = "reverse" if index % 2 == 0 else "random"
    final = minimalize(inst, built, delete, rng)
    # info: (|X|, X is a cover)
    return RunResult(tuple(sorted(final)), (len(x), len(built) == len(x)))


def shs(inst: ScpInstance, iterations: int = 400, base_seed: int = 0, workers: int = 1) -> MultiResult:
    """Best of ``iterations`` single hitting-set runs."""
    jobs = [(i, base_seed + i) for i in range(iterations)]
    return best_of(run_iterations(shs_iteration, inst, jobs, workers))


@dataclass(frozen=True)
class DhsTrace:
    t_good: tuple[int, ...]
    x: tuple[int, ...]
    y: tuple[int, ...]
    covers_t_good: bool


def dhs_once(inst: ScpInstance, t: int, rng: SplitMix64, delete: str) -> tuple[list[int], DhsTrace]:
    tabs = _tables(inst)
    net = inst.network
    nf = inst.n_facilities
    fidx = {f: i for i, f in enumerate(inst.facilities)}
    cidx = {c: i for i, c in enumerate(inst.customers)}
    ct = tabs.goodness.t_good(t)
    x: list[int] = []
    y: list[int] = []
    if ct:
        # (i) hit S_c = {c} + good facilities for every t-good c
        s_rows = np.zeros((len(ct), nf), dtype=bool)
        for k, c in enumerate(ct):
            s_rows[k, fidx[c]] = True
            s_rows[k, [fidx[f] for f in tabs.goodness.good[c]]] = True
        x = greedy_hitting_set(s_rows, rng)
        chosen = np.zeros(nf, dtype=bool)
        chosen[x] = True
        cov = coverage(inst, chosen)
        # (ii) t-good customers X leaves uncovered
        second = []
        for k, c in enumerate(ct):
            if cov[cidx[c]]:
                continue
            fc = int(np.flatnonzero(chosen & s_rows[k])[0])
            xc = tabs.goodness.good[c][inst.facilities[fc]]
            # (iii) F_c = {c} + facilities all of whose shortest paths avoid x_c
            second.append(tabs.avoid[(c, xc)])
        if second:
            y = greedy_hitting_set(np.array(second), rng)
    xy = list(dict.fromkeys(x + y))
    chosen = np.zeros(nf, dtype=bool)
    chosen[xy] = True
    cov = coverage(inst, chosen)
    ok = all(cov[cidx[c]] for c in ct)
    if not ok:
        raise AssertionError("X+Y fails to cover the t-good customers")
    built = greedy_construct(inst, rng=rng, initial=xy) if not cov.all() else xy
    final = minimalize(inst, built, delete, rng)
    return final, DhsTrace(tuple(ct), tuple(x), tuple(y), ok)


def dhs_iteration(inst: ScpInstance, index: int, seed: int, t: int) -> RunResult:
    rng = SplitMix64(seed)
    delete = "reverse" if index % 2 == 0 else "random"
    final, trace = dhs_once(inst, t, rng, delete)
    xy = len(set(trace.x) | set(trace.y))
    return RunResult(tuple(sorted(final)), (len(trace.x), xy, len(trace.t_good)))


def dhs(inst: ScpInstance, t: int, iterations: int = 400, base_seed: int = 0, workers: int = 1) -> MultiResult:
    """Best of ``iterations`` double hitting-set runs with goodness threshold t."""
    if not 1 <= t <= max(1, inst.n_facilities):
        raise ValueError(f"t must lie in [1, |F|], got {t}")
    jobs = [(i, base_seed + i, t) for i in range(iterations)]
    return best_of(run_iterations(dhs_iteration, inst, jobs, workers))


def half_t(inst: ScpInstance) -> int:
    """The DHS_H threshold floor(|F|/2), at least 1."""
    return max(1, inst.n_facilities // 2)
