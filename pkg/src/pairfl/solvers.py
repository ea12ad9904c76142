"""One entry point for every cover algorithm, including mixed portfolios."""

from __future__ import annotations

from dataclasses import dataclass, field

from .exact import solve_exact
from .genetic import GaParams, evolve
from .hitting import dhs_iteration, half_t, shs_iteration
from .scp import COMBINATIONS, RunResult, ScpInstance, best_of, block_assignment, greedy_iteration, run_iterations

ALGORITHMS = ("greedy", "genetic", "shs", "dhs", "exact", "portfolio")
ITERATIVE = ("greedy", "shs", "dhs")
SET_ONLY = ("shs", "dhs")


@dataclass
class Outcome:
    """What an algorithm produced, independent of how it is reported."""

    cover: tuple[int, ...]  # facility indices
    status: str = "ok"
    iterations: int = 0
    best_index: int | None = None
    sizes: list[int] = field(default_factory=list)
    extra: dict = field(default_factory=dict)


def parse_portfolio(spec: str) -> list[tuple[str, int]]:
    """``"shs:200+greedy:200"`` -> [("shs", 200), ("greedy", 200)]."""
    parts = []
    for chunk in spec.split("+"):
        name, sep, count = chunk.strip().partition(":")
        if not sep or name not in ITERATIVE:
            raise ValueError(f"bad portfolio part {chunk!r}; use name:count with name in {ITERATIVE}")
        n = int(count)
        if n < 1:
            raise ValueError(f"portfolio part {chunk!r} needs a positive count")
        parts.append((name, n))
    if not parts:
        raise ValueError("empty portfolio")
    return parts


def resolve_t(inst: ScpInstance, t: int | str | None) -> int:
    if t is None or t == "half":
        return half_t(inst)
    return int(t)


def _jobs(name: str, count: int, offset: int, base_seed: int, t: int) -> tuple:
    if name == "greedy":
        blocks = block_assignment(count, len(COMBINATIONS))
        return greedy_iteration, [(i, base_seed + offset + i, COMBINATIONS[b]) for i, b in enumerate(blocks)]
    if name == "shs":
        return shs_iteration, [(i, base_seed + offset + i) for i in range(count)]
    return dhs_iteration, [(i, base_seed + offset + i, t) for i in range(count)]


def run_portfolio(
    inst: ScpInstance,
    parts: list[tuple[str, int]],
    base_seed: int = 0,
    t: int | str | None = None,
    workers: int = 1,
) -> list[RunResult]:
    """Iterations of each part in turn; iteration g overall uses seed base_seed + g.

    A single part reproduces the stand-alone multi-run heuristic exactly.
    """
    tt = resolve_t(inst, t)
    runs: list[RunResult] = []
    for name, count in parts:
        fn, jobs = _jobs(name, count, len(runs), base_seed, tt)
        runs.extend(run_iterations(fn, inst, jobs, workers))
    return runs


def run_algorithm(
    inst: ScpInstance,
    algorithm: str,
    iterations: int = 400,
    seed: int = 0,
    t: int | str | None = None,
    workers: int = 1,
    portfolio: str | None = None,
    node_limit: int | None = None,
    time_limit: float | None = None,
    ga: dict | None = None,
) -> Outcome:
    inst.check_feasible()
    if algorithm in SET_ONLY or (portfolio and any(n in SET_ONLY for n, _ in parse_portfolio(portfolio))):
        if inst.mode != "set":
            raise ValueError(f"{algorithm} needs mode=set")
    if algorithm in ITERATIVE or algorithm == "portfolio":
        if algorithm == "portfolio":
            if not portfolio:
                raise ValueError("portfolio needs a spec such as shs:200+greedy:200")
            parts = parse_portfolio(portfolio)
        else:
            parts = [(algorithm, iterations)]
        if sum(n for _, n in parts) < 1:
            raise ValueError("iterations must be positive")
        runs = run_portfolio(inst, parts, seed, t, workers)
        multi = best_of(runs)
        extra = {"t": resolve_t(inst, t)} if any(n == "dhs" for n, _ in parts) else {}
        return Outcome(multi.best, "ok", len(runs), multi.best_index, multi.sizes, extra)
    if algorithm == "genetic":
        params = GaParams.defaults(inst, seed=seed, **(ga or {}))
        res = evolve(inst, params)
        return Outcome(res.best, "ok", res.generations, None, [], {"generations": res.generations})
    if algorithm == "exact":
        res = solve_exact(inst, node_limit=node_limit, time_limit=time_limit)
        return Outcome(
            res.cover,
            "optimal" if res.optimal else "budget_exceeded",
            0,
            None,
            [],
            {"nodes": res.nodes, "exact_lower_bound": res.lower_bound},
        )
    raise ValueError(f"unknown algorithm {algorithm!r}")
