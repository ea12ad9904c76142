"""Biased random-key genetic algorithm over 0-1 facility chromosomes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .rng import SplitMix64
from .scp import ScpInstance, coverage, greedy_construct, minimalize


@dataclass(frozen=True)
class GaParams:
    population: int
    stall_limit: int
    elite_fraction: float = 0.15
    immigrant_fraction: float = 0.10
    inherit_prob: float = 0.70
    seed: int = 0
    max_generations: int | None = None
    minimalize_final: bool = False

    def __post_init__(self) -> None:
        if self.population < 2:
            raise ValueError("population must be at least 2")
        if self.stall_limit < 1:
            raise ValueError("stall limit must be positive")
        for name in ("elite_fraction", "immigrant_fraction", "inherit_prob"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ValueError(f"{name} must lie in (0, 1)")
        if self.elite_fraction + self.immigrant_fraction >= 1:
            raise ValueError("elite and immigrant fractions must sum below 1")
        if self.n_elite + self.n_immigrants > self.population:
            raise ValueError("rounded elite and immigrant counts exceed the population")

    @classmethod
    def defaults(cls, inst: ScpInstance, **kw) -> "GaParams":
        """p = min(300, |F|) and q = |V| (|F| when there is no network)."""
        p = max(2, min(300, inst.n_facilities))
        net = inst.network
        q = net.vertex_count if net is not None else max(1, inst.n_facilities)
        kw.setdefault("population", p)
        kw.setdefault("stall_limit", q)
        return cls(**kw)

    @property
    def n_elite(self) -> int:
        return math.ceil(self.elite_fraction * self.population)

    @property
    def n_immigrants(self) -> int:
        return math.ceil(self.immigrant_fraction * self.population)

    @property
    def n_crossovers(self) -> int:
        return self.population - self.n_elite - self.n_immigrants


def decode(inst: ScpInstance, genes: np.ndarray) -> list[int]:
    """Cover from a chromosome: its 1-genes, completed by plain Greedy if needed.

    Ties in the completion go to the lowest index, so the result is a pure
    function of the genes.  No minimalization.
    """
    genes = np.asarray(genes, dtype=bool)
    if len(genes) != inst.n_facilities:
        raise ValueError("chromosome length differs from |F|")
    start = np.flatnonzero(genes).tolist()
    if start and coverage(inst, genes).all():
        return start
    if not start:
        return sorted(greedy_construct(inst))
    return sorted(greedy_construct(inst, initial=start))


def random_genes(rng: SplitMix64, k: int) -> np.ndarray:
    out = np.empty(k, dtype=bool)
    word, left = 0, 0
    for i in range(k):
        if not left:
            word, left = rng.next_u64(), 64
        out[i] = word & 1
        word >>= 1
        left -= 1
    return out


@dataclass
class GaResult:
    best: tuple[int, ...]
    generations: int
    log: list[str] = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.best)


class _Evaluator:
    """Memoized decode; fitness depends on the genes alone."""

    def __init__(self, inst: ScpInstance):
        self.inst = inst
        self.cache: dict[bytes, list[int]] = {}

    def __call__(self, genes: np.ndarray) -> list[int]:
        key = np.packbits(genes).tobytes()
        hit = self.cache.get(key)
        if hit is None:
            hit = self.cache[key] = decode(self.inst, genes)
        return hit


def evolve(inst: ScpInstance, params: GaParams | None = None) -> GaResult:
    """Run generations until ``stall_limit`` pass without a smaller best cover.

    Each generation keeps the elite, adds random immigrants and fills the
    rest with biased crossovers (elite parent gene kept with probability
    ``inherit_prob``).  Log lines are ``generation,best,mean,stall``.
    """
    inst.check_feasible()
    if params is None:
        params = GaParams.defaults(inst)
    k = inst.n_facilities
    p = params.population
    root = SplitMix64(params.seed)
    evo = root.derive("evolve")
    evaluate = _Evaluator(inst)

    # individual 0 is all zeros, i.e. the plain greedy cover, so elitism
    # guarantees the result is never worse than greedy
    pop = [np.zeros(k, dtype=bool)] + [random_genes(root.derive(f"init:{i}"), k) for i in range(1, p)]
    covers = [evaluate(g) for g in pop]
    log: list[str] = []

    def rank() -> list[int]:
        return sorted(range(p), key=lambda i: (len(covers[i]), i))

    order = rank()
    best = covers[order[0]]
    stall = 0
    gen = 0
    log.append(_log_line(gen, best, covers, stall))
    while stall < params.stall_limit:
        if params.max_generations is not None and gen >= params.max_generations:
            break
        gen += 1
        elite = [pop[i] for i in order[: params.n_elite]]
        rest = [pop[i] for i in order[params.n_elite :]]
        nxt = [g.copy() for g in elite]
        nxt += [random_genes(root.derive(f"immigrant:{gen}:{j}"), k) for j in range(params.n_immigrants)]
        for _ in range(params.n_crossovers):
            x = elite[evo.below(len(elite))]
            y = rest[evo.below(len(rest))]
            take = np.array([evo.random() < params.inherit_prob for _ in range(k)], dtype=bool)
            nxt.append(np.where(take, x, y))
        pop = nxt
        covers = [evaluate(g) for g in pop]
        order = rank()
        champion = covers[order[0]]
        if len(champion) < len(best):
            best = champion
            stall = 0
        else:
            stall += 1
        log.append(_log_line(gen, best, covers, stall))
    final = list(best)
    if params.minimalize_final:
        final = sorted(minimalize(inst, final))
    return GaResult(tuple(final), gen, log)


def _log_line(gen: int, best: list[int], covers: list[list[int]], stall: int) -> str:
    mean = sum(len(c) for c in covers) / len(covers)
    return f"{gen},{len(best)},{mean:.3f},{stall}"
