"""Exact optimum by branch and bound, a brute-force oracle and LP-file export."""

from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .hitting import HittingSetInstance, build_hslb_instance, min_hitting_set
from .scp import InfeasibleError, ScpInstance, coverage, greedy_construct, minimalize

BRUTE_FORCE_MAX = 20
_VECTOR_MAX = 16


@dataclass(frozen=True, order=True)
class BnbNode:
    """Search node: facilities forced in and out, with the parent's bound.

    Nodes are self-contained so they could be handed to another worker.
    """

    lower_bound: int
    depth_key: int
    seq: int
    forced_in: frozenset = field(compare=False)
    forced_out: frozenset = field(compare=False)


@dataclass
class ExactResult:
    cover: tuple[int, ...]
    status: str  # "optimal" or "budget_exceeded"
    nodes: int
    lower_bound: int

    @property
    def size(self) -> int:
        return len(self.cover)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


class _Bounder:
    """Per-instance tables for bounding and branching."""

    def __init__(self, inst: ScpInstance, use_hslb: bool, hslb_node_limit: int):
        self.inst = inst
        t = inst.triples
        self.ptr = np.searchsorted(t[:, 0], np.arange(inst.n_customers + 1))
        self.hs = None
        if use_hslb:
            self.hs = build_hslb_instance(inst.network)
            self.hs_masks = self.hs.masks
        self.hslb_node_limit = hslb_node_limit

    def _pair_packing(self, fin: np.ndarray, fout: np.ndarray, covered: np.ndarray):
        """Packing bound over uncovered customers, plus residual coverage.

        For an uncovered u, K_u holds the facilities that could still take
        part in covering it and need_u how many of them must be added (1 if
        u itself or a partner of a forced-in facility will do, else 2).
        Customers with disjoint K_u need disjoint additions.  Returns None
        when some customer can no longer be covered.
        """
        inst = self.inst
        t = inst.triples
        sets = []
        residual = np.zeros(inst.n_facilities, dtype=np.int64)
        for u in np.flatnonzero(~covered):
            rows = t[self.ptr[u] : self.ptr[u + 1]]
            a, b = rows[:, 1], rows[:, 2]
            ok = ~(fout[a] | fout[b])
            a, b = a[ok], b[ok]
            need = 2
            members = set()
            s = int(inst.self_index[u])
            if s >= 0 and not fout[s]:
                members.add(s)
                need = 1
            ina, inb = fin[a], fin[b]
            if ina.any() or inb.any():
                need = 1
            members.update(b[ina].tolist())
            members.update(a[inb].tolist())
            free = ~(ina | inb)
            members.update(a[free].tolist())
            members.update(b[free].tolist())
            if not members:
                return None, residual
            residual[list(members)] += 1
            mask = 0
            for f in members:
                mask |= 1 << f
            sets.append((len(members), need, mask))
        sets.sort(key=lambda x: (x[0], -x[1]))
        used = 0
        total = 0
        for _, need, mask in sets:
            if not used & mask:
                used |= mask
                total += need
        return total, residual

    def bound(self, fin: np.ndarray, fout: np.ndarray) -> tuple[int | None, np.ndarray]:
        covered = coverage(self.inst, fin)
        packing, residual = self._pair_packing(fin, fout, covered)
        if packing is None:
            return None, residual
        lb = int(fin.sum()) + packing
        if self.hs is not None:
            res = min_hitting_set(
                self.hs_masks,
                len(self.hs.facilities),
                forced_in=np.flatnonzero(fin).tolist(),
                forced_out=np.flatnonzero(fout).tolist(),
                node_limit=self.hslb_node_limit,
            )
            if not res.feasible:
                return None, residual
            lb = max(lb, res.value if res.optimal else res.lower_bound)
        return lb, residual


def solve_exact(
    inst: ScpInstance,
    node_limit: int | None = None,
    time_limit: float | None = None,
    incumbent: Sequence[int] | None = None,
    hslb_node_limit: int = 2000,
) -> ExactResult:
    """Minimum cover by best-first branch and bound on "facility in / out".

    Bounds come from the hitting-set relaxation when the instance was built
    from set-disjoint triples of a network, and from a pair-packing bound
    otherwise (and always, taking the larger).  Each node also completes
    its partial solution greedily to improve the incumbent.  When a budget
    runs out the best cover found so far is returned with status
    ``budget_exceeded``.
    """
    inst.check_feasible()
    nf = inst.n_facilities
    start = time.monotonic()
    if incumbent is None:
        built = greedy_construct(inst)
        best = minimalize(inst, built)
    else:
        best = list(incumbent)
    best = sorted(int(f) for f in best)
    if inst.n_customers == 0:
        return ExactResult((), "optimal", 0, 0)

    use_hslb = inst.mode == "set" and inst.network is not None
    bounder = _Bounder(inst, use_hslb, hslb_node_limit)
    counter = itertools.count()
    heap = [BnbNode(0, 0, -next(counter), frozenset(), frozenset())]
    nodes = 0
    global_lb = 0
    status = "optimal"
    while heap:
        node = heapq.heappop(heap)
        if node.lower_bound >= len(best):
            continue
        if (node_limit is not None and nodes >= node_limit) or (
            time_limit is not None and time.monotonic() - start > time_limit
        ):
            heapq.heappush(heap, node)
            status = "budget_exceeded"
            break
        nodes += 1
        fin = np.zeros(nf, dtype=bool)
        fin[list(node.forced_in)] = True
        fout = np.zeros(nf, dtype=bool)
        fout[list(node.forced_out)] = True
        lb, residual = bounder.bound(fin, fout)
        if lb is None or lb >= len(best):
            continue
        if coverage(inst, fin).all():
            best = sorted(node.forced_in)
            continue
        try:
            built = greedy_construct(inst, initial=sorted(node.forced_in), forbidden=node.forced_out)
        except InfeasibleError:
            continue
        done = sorted(minimalize(inst, built))
        if len(done) < len(best):
            best = done
        if lb >= len(best):
            continue
        free = ~(fin | fout)
        score = np.where(free, residual, -1)
        f = int(np.argmax(score))
        if score[f] <= 0:
            continue
        depth = len(node.forced_in) + len(node.forced_out) + 1
        # include pushed last so that on equal keys it is explored first
        heapq.heappush(heap, BnbNode(lb, -depth, -next(counter), node.forced_in, node.forced_out | {f}))
        heapq.heappush(heap, BnbNode(lb, -depth, -next(counter), node.forced_in | {f}, node.forced_out))
    if status == "optimal":
        global_lb = len(best)
    else:
        global_lb = min([n.lower_bound for n in heap if n.lower_bound < len(best)] or [len(best)])
    return ExactResult(tuple(best), status, nodes, global_lb)


def brute_force_optimum(inst: ScpInstance) -> tuple[int, ...]:
    """Smallest cover by exhaustive enumeration, sizes in increasing order.

    Among minimum covers the lexicographically first (the one
    ``itertools.combinations`` reaches first) is returned.
    """
    nf = inst.n_facilities
    if nf > BRUTE_FORCE_MAX:
        raise ValueError(f"brute force refuses |F| = {nf} > {BRUTE_FORCE_MAX}")
    inst.check_feasible()
    if inst.n_customers == 0:
        return ()
    if nf <= _VECTOR_MAX:
        return _brute_vector(inst)
    return _brute_combinations(inst)


def _brute_vector(inst: ScpInstance) -> tuple[int, ...]:
    nf = inst.n_facilities
    subsets = np.arange(1 << nf, dtype=np.int64)
    ok = np.ones(1 << nf, dtype=bool)
    t = inst.triples
    for u in range(inst.n_customers):
        cov = np.zeros(1 << nf, dtype=bool)
        s = int(inst.self_index[u])
        if s >= 0:
            cov |= (subsets >> s & 1).astype(bool)
        rows = t[t[:, 0] == u]
        for p in np.unique((1 << rows[:, 1]) | (1 << rows[:, 2])):
            cov |= (subsets & p) == p
        ok &= cov
    sizes = np.zeros(1 << nf, dtype=np.int64)
    for f in range(nf):
        sizes += subsets >> f & 1
    k = sizes[ok].min()
    cands = subsets[ok & (sizes == k)]
    return min(tuple(f for f in range(nf) if m >> f & 1) for m in cands.tolist())


def _brute_combinations(inst: ScpInstance) -> tuple[int, ...]:
    nf = inst.n_facilities
    t = inst.triples
    need = []
    for u in range(inst.n_customers):
        rows = t[t[:, 0] == u]
        pairs = sorted({(1 << int(a)) | (1 << int(b)) for a, b in rows[:, 1:]})
        s = int(inst.self_index[u])
        need.append((1 << s if s >= 0 else 0, pairs))
    for k in range(nf + 1):
        for combo in itertools.combinations(range(nf), k):
            m = 0
            for f in combo:
                m |= 1 << f
            if all((sm & m) or any(p & m == p for p in pairs) for sm, pairs in need):
                return combo
    raise InfeasibleError(None)


# ---------------------------------------------------------------------------
# LP export


def _wrap(prefix: str, terms: list[str], tail: str = "", per_line: int = 8) -> list[str]:
    """Expression split over continuation lines (LP readers cap line length)."""
    if not terms:
        return [f"{prefix}{tail}".rstrip()]
    out = []
    for i in range(0, len(terms), per_line):
        chunk = " + ".join(terms[i : i + per_line])
        lead = prefix if i == 0 else "   + "
        out.append(lead + chunk)
    out[-1] += tail
    return out


def _ids(inst: ScpInstance) -> list[str]:
    return [str(s) for s in inst.facilities]


def mip_lp_text(inst: ScpInstance) -> str:
    """The cover-by-pairs integer program in LP format.

    ``x_<id>`` is binary per facility; ``y_<a>_<b>`` (a < b by index) is
    continuous, created only for pairs that occur in some triple.
    """
    ids = _ids(inst)
    order = sorted(range(inst.n_facilities), key=lambda i: inst.facilities[i])
    t = inst.triples
    pairs = sorted({(int(a), int(b)) for a, b in t[:, 1:]}, key=lambda p: (inst.facilities[p[0]], inst.facilities[p[1]]))
    yname = {p: f"y_{ids[p[0]]}_{ids[p[1]]}" for p in pairs}
    lines = ["\\ cover by pairs", "Minimize"]
    lines += _wrap(" obj: ", [f"x_{ids[i]}" for i in order])
    lines.append("Subject To")
    for a, b in pairs:
        y = yname[(a, b)]
        lines.append(f" ya_{ids[a]}_{ids[b]}: {y} - x_{ids[a]} <= 0")
        lines.append(f" yb_{ids[a]}_{ids[b]}: {y} - x_{ids[b]} <= 0")
    by_u: dict[int, set] = {}
    for u, a, b in t.tolist():
        by_u.setdefault(u, set()).add((a, b))
    corder = sorted(range(inst.n_customers), key=lambda u: inst.customers[u])
    for u in corder:
        terms = []
        s = int(inst.self_index[u])
        if s >= 0:
            terms.append(f"x_{ids[s]}")
        terms += [yname[p] for p in sorted(by_u.get(u, ()), key=lambda p: yname[p])]
        lines += _wrap(f" cov_{inst.customers[u]}: ", terms, " >= 1")
    lines.append("Bounds")
    lines += [f" {yname[p]} >= 0" for p in pairs]
    lines.append("Binary")
    lines += [f" x_{ids[i]}" for i in order]
    lines.append("End")
    return "\n".join(lines) + "\n"


def hslb_lp_text(hs: HittingSetInstance) -> str:
    """The hitting-set relaxation in LP format: one row per (customer, neighbor)."""
    ids = [str(f) for f in hs.facilities]
    lines = ["\\ hitting set lower bound", "Minimize"]
    lines += _wrap(" obj: ", [f"x_{s}" for s in ids])
    lines.append("Subject To")
    for k, (c, x) in enumerate(hs.elements):
        terms = [f"x_{ids[f]}" for f in np.flatnonzero(hs.hitters[k])]
        lines += _wrap(f" hit_{c}_{x}: ", terms, " >= 1")
    lines.append("Binary")
    lines += [f" x_{s}" for s in ids]
    lines.append("End")
    return "\n".join(lines) + "\n"


def _write(path, text: str) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(text)


def export_mip_lp(inst: ScpInstance, path) -> None:
    _write(path, mip_lp_text(inst))


def export_hslb_lp(hs: HittingSetInstance, path) -> None:
    _write(path, hslb_lp_text(hs))
