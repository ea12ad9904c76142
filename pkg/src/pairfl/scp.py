"""Set Cover by Pairs: instances, validation, randomized Greedy, minimalization.

Elements of U are addressed by local index ``0..n_customers-1`` and cover
objects by ``0..n_facilities-1``; ``customers``/``facilities`` hold the
external labels (vertex ids for network-derived instances).  A pair triple
``(u, a, b)`` has ``a < b``.  ``self_index[u]`` is the object that is ``u``
itself (covers it alone), or -1.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np

from .rng import SplitMix64

START_MODES = ("best_pair", "random_customer")
DELETE_MODES = ("reverse", "random")
COMBINATIONS = tuple((s, d) for s in START_MODES for d in DELETE_MODES)


class InfeasibleError(ValueError):
    def __init__(self, customer) -> None:
        super().__init__(f"customer {customer} cannot be covered by any pair or by itself")
        self.customer = customer


@dataclass(frozen=True, eq=False)
class ScpInstance:
    customers: tuple
    facilities: tuple
    triples: np.ndarray = field(repr=False)
    self_index: np.ndarray = field(repr=False)
    mode: str | None = None
    network: object | None = field(default=None, repr=False)

    @classmethod
    def build(
        cls,
        customers: Sequence,
        facilities: Sequence,
        triples: Iterable[tuple],
        self_cover: bool = True,
        mode: str | None = None,
        network=None,
    ) -> "ScpInstance":
        """Instance from labelled triples ``(u, s, t)``; pairs are unordered.

        With ``self_cover`` every customer that is also a cover object
        covers itself.
        """
        customers = tuple(customers)
        facilities = tuple(facilities)
        cidx = {u: i for i, u in enumerate(customers)}
        fidx = {s: i for i, s in enumerate(facilities)}
        rows = []
        for u, s, t in triples:
            a, b = fidx[s], fidx[t]
            if a == b:
                raise ValueError(f"triple {(u, s, t)} repeats a facility")
            if self_cover and u in (s, t):
                continue  # u alone already covers u
            rows.append((cidx[u], min(a, b), max(a, b)))
        arr = np.unique(np.asarray(rows, dtype=np.int64).reshape(-1, 3), axis=0)
        self_index = np.array(
            [fidx.get(u, -1) if self_cover else -1 for u in customers], dtype=np.int64
        )
        return cls(customers, facilities, arr, self_index, mode, network)

    @classmethod
    def from_network(cls, net, triple_set) -> "ScpInstance":
        fidx = {f: i for i, f in enumerate(net.facilities)}
        cidx = {c: i for i, c in enumerate(net.customers)}
        rows = triple_set.by_customer
        if len(rows):
            cmap = np.full(net.vertex_count, -1, dtype=np.int64)
            fmap = np.full(net.vertex_count, -1, dtype=np.int64)
            cmap[list(cidx)] = list(cidx.values())
            fmap[list(fidx)] = list(fidx.values())
            arr = np.stack([cmap[rows[:, 0]], fmap[rows[:, 1]], fmap[rows[:, 2]]], axis=1)
        else:
            arr = np.empty((0, 3), dtype=np.int64)
        self_index = np.array([fidx.get(c, -1) for c in net.customers], dtype=np.int64)
        return cls(net.customers, net.facilities, arr, self_index, triple_set.mode, net)

    # -- derived structures -------------------------------------------------

    @property
    def n_customers(self) -> int:
        return len(self.customers)

    @property
    def n_facilities(self) -> int:
        return len(self.facilities)

    @cached_property
    def facility_lists(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """CSR view: for facility f, rows ``ptr[f]:ptr[f+1]`` of (customer, partner)."""
        t = self.triples
        nf = self.n_facilities
        cust = np.concatenate([t[:, 0], t[:, 0]])
        own = np.concatenate([t[:, 1], t[:, 2]])
        partner = np.concatenate([t[:, 2], t[:, 1]])
        order = np.lexsort((partner, cust, own))
        ptr = np.zeros(nf + 1, dtype=np.int64)
        np.cumsum(np.bincount(own, minlength=nf), out=ptr[1:])
        return ptr, cust[order], partner[order]

    def facility_list(self, f: int) -> tuple[np.ndarray, np.ndarray]:
        ptr, cust, partner = self.facility_lists
        return cust[ptr[f] : ptr[f + 1]], partner[ptr[f] : ptr[f + 1]]

    @cached_property
    def incidence(self) -> np.ndarray:
        """``incidence[u, f]``: f occurs in some triple of u."""
        inc = np.zeros((self.n_customers, self.n_facilities), dtype=bool)
        t = self.triples
        inc[t[:, 0], t[:, 1]] = True
        inc[t[:, 0], t[:, 2]] = True
        return inc

    @cached_property
    def customers_of_facility(self) -> np.ndarray:
        """Number of customers each facility is (0 or 1)."""
        out = np.zeros(self.n_facilities, dtype=np.int64)
        s = self.self_index[self.self_index >= 0]
        np.add.at(out, s, 1)
        return out

    def check_feasible(self) -> None:
        has_pair = np.zeros(self.n_customers, dtype=bool)
        has_pair[self.triples[:, 0]] = True
        bad = np.flatnonzero(~has_pair & (self.self_index < 0))
        if len(bad):
            raise InfeasibleError(self.customers[bad[0]])

    # -- label conversion ---------------------------------------------------

    def labels(self, idx: Iterable[int]) -> list:
        return [self.facilities[i] for i in idx]

    def indices(self, labels: Iterable) -> list[int]:
        fidx = {s: i for i, s in enumerate(self.facilities)}
        return [fidx[s] for s in labels]


def coverage(inst: ScpInstance, chosen: np.ndarray) -> np.ndarray:
    """Boolean per customer: covered by the chosen objects (mask over facilities)."""
    chosen = np.asarray(chosen, dtype=bool)
    t = inst.triples
    covered = np.zeros(inst.n_customers, dtype=bool)
    both = chosen[t[:, 1]] & chosen[t[:, 2]]
    covered[t[both, 0]] = True
    s = inst.self_index
    covered |= (s >= 0) & chosen[np.where(s >= 0, s, 0)]
    return covered


def _mask(inst: ScpInstance, cover: Iterable[int]) -> np.ndarray:
    m = np.zeros(inst.n_facilities, dtype=bool)
    m[list(cover)] = True
    return m


def validate_cover(inst: ScpInstance, candidate: Iterable[int]) -> tuple[bool, object | None]:
    """(valid, first uncovered customer label or None); candidate is facility indices."""
    covered = coverage(inst, _mask(inst, candidate))
    missing = np.flatnonzero(~covered)
    if len(missing):
        return False, inst.customers[missing[0]]
    return True, None


# ---------------------------------------------------------------------------
# construction


@dataclass
class OpCounter:
    """Facility-list accesses during one construct/minimalize cycle."""

    reads: int = 0
    list_access: dict = field(default_factory=dict)

    def touch(self, f: int, length: int) -> None:
        self.reads += length
        self.list_access[f] = self.list_access.get(f, 0) + 1


class _Growth:
    """State for adding facilities one at a time.

    ``hit[u, f]`` counts chosen partners g with (u, f, g) a triple, so adding
    f would cover u iff ``hit[u, f] > 0`` (or f is u itself).  ``gain[f]``
    counts uncovered customers f would cover; ``reach[f]`` counts uncovered
    customers f appears in a triple with, used when no single addition
    covers anyone.
    """

    def __init__(self, inst: ScpInstance, forbidden: np.ndarray | None = None, counter: OpCounter | None = None):
        self.inst = inst
        nu, nf = inst.n_customers, inst.n_facilities
        self.chosen = np.zeros(nf, dtype=bool)
        self.forbidden = np.zeros(nf, dtype=bool) if forbidden is None else forbidden.copy()
        self.covered = np.zeros(nu, dtype=bool)
        self.hit = np.zeros((nu, nf), dtype=np.int32)
        self.gain = inst.customers_of_facility.copy()
        self.reach = inst.incidence.sum(axis=0).astype(np.int64)
        self.order: list[int] = []
        self.counter = counter
        s = inst.self_index
        self.self_index = s
        self.has_self = s >= 0
        self.self_safe = np.where(s >= 0, s, 0)

    def add(self, f: int) -> None:
        if self.chosen[f]:
            return
        self.chosen[f] = True
        self.order.append(f)
        cust, partner = self.inst.facility_list(f)
        if self.counter is not None:
            self.counter.touch(f, len(cust))
        live = ~self.covered[cust]
        cu, pa = cust[live], partner[live]
        self.hit[cu, pa] += 1
        fresh = pa[self.hit[cu, pa] == 1]
        if len(fresh):
            self.gain += np.bincount(fresh, minlength=len(self.gain))
        newly = ~self.covered & ((self.has_self & (self.self_index == f)) | (self.hit[:, f] > 0))
        if newly.any():
            self.gain -= (self.hit[newly] > 0).sum(axis=0)
            selfs = self.self_index[newly]
            selfs = selfs[selfs >= 0]
            if len(selfs):
                np.subtract.at(self.gain, selfs, 1)
            self.reach -= self.inst.incidence[newly].sum(axis=0)
            self.covered |= newly

    def done(self) -> bool:
        return bool(self.covered.all())

    def pick(self, rng: SplitMix64 | None) -> int:
        open_ = ~(self.chosen | self.forbidden)
        score = np.where(open_, self.gain, -1)
        best = score.max() if len(score) else -1
        if best <= 0:
            score = np.where(open_, self.reach, -1)
            best = score.max() if len(score) else -1
            if best <= 0:
                missing = np.flatnonzero(~self.covered)[0]
                raise InfeasibleError(self.inst.customers[missing])
        ties = np.flatnonzero(score == best)
        if rng is None or len(ties) == 1:
            return int(ties[0])
        return int(ties[rng.below(len(ties))])

    def fill(self, rng: SplitMix64 | None) -> None:
        while not self.done():
            self.add(self.pick(rng))


def _best_pair(inst: ScpInstance, rng: SplitMix64 | None, forbidden: np.ndarray) -> tuple[int, int] | None:
    t = inst.triples
    if forbidden.any():
        t = t[~(forbidden[t[:, 1]] | forbidden[t[:, 2]])]
    if not len(t):
        return None
    nf = inst.n_facilities
    keys, counts = np.unique(t[:, 1] * nf + t[:, 2], return_counts=True)
    a, b = keys // nf, keys % nf
    own = inst.customers_of_facility
    score = counts + own[a] + own[b]
    ties = np.flatnonzero(score == score.max())
    k = ties[0] if rng is None or len(ties) == 1 else ties[rng.below(len(ties))]
    return int(a[k]), int(b[k])


def greedy_construct(
    inst: ScpInstance,
    start_mode: str = "best_pair",
    rng: SplitMix64 | None = None,
    initial: Sequence[int] = (),
    forbidden: Iterable[int] = (),
    counter: OpCounter | None = None,
) -> list[int]:
    """Greedy cover, returned in order of addition (facility indices).

    Repeatedly adds the facility covering the most additional customers;
    ties are broken uniformly at random by ``rng`` or, without one, by
    lowest index.  If ``initial`` is given it seeds the cover and
    ``start_mode`` is ignored.
    """
    if start_mode not in START_MODES:
        raise ValueError(f"unknown start mode {start_mode!r}")
    inst.check_feasible()
    fb = np.zeros(inst.n_facilities, dtype=bool)
    fb[list(forbidden)] = True
    g = _Growth(inst, fb, counter)
    if initial:
        for f in initial:
            g.add(int(f))
    elif start_mode == "best_pair":
        pair = _best_pair(inst, rng, fb)
        if pair is not None:
            g.add(pair[0])
            g.add(pair[1])
    else:
        selfs = [int(s) for s in inst.self_index if s >= 0 and not fb[s]]
        if selfs:
            g.add(selfs[rng.below(len(selfs))] if rng is not None else selfs[0])
    g.fill(rng)
    return g.order


# ---------------------------------------------------------------------------
# minimalization


class CoverState:
    """Counting structures over a cover for fast "is f still removable".

    ``mycount[u]`` is the number of valid pairs for u (both members in the
    cover); ``covercount[u, f]`` the number of those containing f, so
    ``covercount[u].sum() == 2 * mycount[u]``.  Column ``f`` compared with
    ``mycount`` is the bucket test: every valid pair of u contains f exactly
    when the two are equal.
    """

    def __init__(self, inst: ScpInstance, cover: Iterable[int], counter: OpCounter | None = None):
        self.inst = inst
        self.counter = counter
        self.chosen = _mask(inst, cover)
        nu, nf = inst.n_customers, inst.n_facilities
        self.mycount = np.zeros(nu, dtype=np.int64)
        self.covercount = np.zeros((nu, nf), dtype=np.int64)
        for f in np.flatnonzero(self.chosen):
            cust, partner = inst.facility_list(int(f))
            if counter is not None:
                counter.touch(int(f), len(cust))
            valid = self.chosen[partner]
            cu = cust[valid]
            np.add.at(self.covercount, (cu, f), 1)
            # each valid pair is seen from both members; count it at the smaller
            lower = partner[valid] > f
            np.add.at(self.mycount, cu[lower], 1)
        s = inst.self_index
        self._has_self = s >= 0
        self._self_safe = np.where(s >= 0, s, 0)

    def self_covered(self) -> np.ndarray:
        return self._has_self & self.chosen[self._self_safe]

    def is_required(self, f: int) -> bool:
        exposed = ~self.self_covered() | (self._has_self & (self.inst.self_index == f))
        return bool(np.any(exposed & (self.covercount[:, f] == self.mycount)))

    def remove(self, f: int) -> None:
        cust, partner = self.inst.facility_list(f)
        if self.counter is not None:
            self.counter.touch(f, len(cust))
        valid = self.chosen[partner]
        cu, pa = cust[valid], partner[valid]
        np.subtract.at(self.mycount, cu, 1)
        np.subtract.at(self.covercount, (cu, f), 1)
        np.subtract.at(self.covercount, (cu, pa), 1)
        self.chosen[f] = False

    def recount(self) -> tuple[np.ndarray, np.ndarray]:
        """mycount/covercount from scratch, for consistency checks."""
        t = self.inst.triples
        valid = self.chosen[t[:, 1]] & self.chosen[t[:, 2]]
        v = t[valid]
        my = np.bincount(v[:, 0], minlength=self.inst.n_customers)
        cc = np.zeros_like(self.covercount)
        np.add.at(cc, (v[:, 0], v[:, 1]), 1)
        np.add.at(cc, (v[:, 0], v[:, 2]), 1)
        return my, cc

    def cover(self) -> list[int]:
        return [int(f) for f in np.flatnonzero(self.chosen)]


def minimalize(
    inst: ScpInstance,
    cover: Sequence[int],
    delete_mode: str = "reverse",
    rng: SplitMix64 | None = None,
    counter: OpCounter | None = None,
    check: bool = False,
) -> list[int]:
    """Drop facilities one at a time while the cover stays valid.

    ``cover`` is in order of addition; ``reverse`` tries the latest first,
    ``random`` a uniformly shuffled order.  The result is 1-minimal and
    keeps the relative order of the survivors.
    """
    if delete_mode not in DELETE_MODES:
        raise ValueError(f"unknown delete mode {delete_mode!r}")
    cover = [int(f) for f in cover]
    state = CoverState(inst, cover, counter)
    trial = list(reversed(cover))
    if delete_mode == "random":
        if rng is None:
            raise ValueError("random delete needs an rng")
        trial = list(cover)
        rng.shuffle(trial)
    for f in trial:
        if not state.is_required(f):
            state.remove(f)
            if check:
                my, cc = state.recount()
                assert np.array_equal(my, state.mycount) and np.array_equal(cc, state.covercount)
    return [f for f in cover if state.chosen[f]]


# ---------------------------------------------------------------------------
# multi-run driver


@dataclass(frozen=True)
class RunResult:
    """One iteration of a randomized heuristic."""

    cover: tuple[int, ...]
    info: tuple = ()


@dataclass
class MultiResult:
    best: tuple[int, ...]
    best_index: int
    sizes: list[int]
    runs: list[RunResult] = field(repr=False, default_factory=list)

    @property
    def size(self) -> int:
        return len(self.best)


def block_assignment(iterations: int, blocks: int) -> list[int]:
    """Block number of each iteration: equal blocks, remainder to the earlier ones."""
    base, extra = divmod(iterations, blocks)
    out = []
    for b in range(blocks):
        out.extend([b] * (base + (1 if b < extra else 0)))
    return out


def greedy_iteration(inst: ScpInstance, index: int, seed: int, combo: tuple[str, str]) -> RunResult:
    rng = SplitMix64(seed)
    start, delete = combo
    built = greedy_construct(inst, start, rng)
    final = minimalize(inst, built, delete, rng)
    return RunResult(tuple(sorted(final)), (len(built),))


def _run_chunk(fn: Callable, inst: ScpInstance, jobs: list[tuple]) -> list[RunResult]:
    return [fn(inst, *args) for args in jobs]


def run_iterations(
    fn: Callable[..., RunResult],
    inst: ScpInstance,
    jobs: list[tuple],
    workers: int = 1,
) -> list[RunResult]:
    """Evaluate ``fn(inst, *args)`` for every job, optionally in worker processes.

    Results come back in job order whatever the scheduling.
    """
    if workers <= 1 or len(jobs) < 2:
        return _run_chunk(fn, inst, jobs)
    workers = min(workers, len(jobs))
    size = -(-len(jobs) // workers)
    chunks = [jobs[i : i + size] for i in range(0, len(jobs), size)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_run_chunk, [fn] * len(chunks), [inst] * len(chunks), chunks))
    return [r for part in parts for r in part]


def best_of(runs: list[RunResult]) -> MultiResult:
    sizes = [len(r.cover) for r in runs]
    best_index = min(range(len(runs)), key=lambda i: (sizes[i], i))
    return MultiResult(runs[best_index].cover, best_index, sizes, runs)


def greedy_multi(inst: ScpInstance, iterations: int = 400, base_seed: int = 0, workers: int = 1) -> MultiResult:
    """Best of ``iterations`` Greedy runs cycling the four option combinations.

    Iteration i uses seed ``base_seed + i``; the winner is the smallest
    cover, earliest iteration on ties.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    inst.check_feasible()
    blocks = block_assignment(iterations, len(COMBINATIONS))
    jobs = [(i, base_seed + i, COMBINATIONS[b]) for i, b in enumerate(blocks)]
    return best_of(run_iterations(greedy_iteration, inst, jobs, workers))
