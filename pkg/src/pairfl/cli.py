"""Command-line interface: generate, triples, solve, bound, report, prob.

Exit codes: 0 success, 1 usage, 2 invalid instance, 3 infeasible or out of budget.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

from .exact import export_hslb_lp, export_mip_lp
from .generator import (
    SIZE_CLASSES,
    WEIGHT_MODES,
    GenParams,
    dump_demands,
    gen_transit_stub,
    gravitational_demands,
    parse_class,
    sample_cf,
)
from .graph import InstanceError, Network, check_symmetric, dump_network, load_network
from .hitting import build_hslb_instance, exact_hitting_set
from .report import (
    SolveReport,
    dump_solution,
    histogram,
    instance_hash,
    reduction_table,
    robustness_failure_prob,
    robustness_table,
)
from .rng import SplitMix64
from .scp import InfeasibleError, ScpInstance, validate_cover
from .solvers import ALGORITHMS, SET_ONLY, run_algorithm
from .special import build_fig4_fixture, build_fig5_fixture, updfl_lower_bound
from .triples import MODES, dump_triples, generate_triples, triple_stats

EXIT_OK, EXIT_USAGE, EXIT_INSTANCE, EXIT_INFEASIBLE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read_instance(path: str) -> tuple[Network, dict]:
    text = Path(path).read_text()
    meta = {}
    for line in text.splitlines():
        if line.startswith("#"):
            key, sep, val = line[1:].strip().partition("=")
            if sep:
                meta[key.strip()] = val.strip()
    return load_network(text), meta


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# ---------------------------------------------------------------------------
# generate


def cmd_generate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.fixture:
        n = args.n
        net = build_fig4_fixture(n) if args.fixture == "fig4" else build_fig5_fixture(n)
        name = out / f"{args.stem}_{args.fixture}_n{n}.dpfl"
        name.write_text(dump_network(net, [f"fixture={args.fixture}", f"n={n}", "class=fixture"]))
        print(f"{name} vertices={net.vertex_count} customers={len(net.customers)} facilities={len(net.facilities)}")
        return EXIT_OK
    if args.size is not None:
        if args.size not in SIZE_CLASSES:
            raise UsageError(f"--size must be one of {sorted(SIZE_CLASSES)}")
        T, NT, S, NS = SIZE_CLASSES[args.size]
    else:
        if None in (args.T, args.NT, args.S, args.NS):
            raise UsageError("give --size or all of --T --NT --S --NS")
        T, NT, S, NS = args.T, args.NT, args.S, args.NS
    classes = [parse_class(c) for c in (args.cls or ["C1,F1"])]
    for seed in range(args.seed, args.seed + args.count):
        params = GenParams(T, NT, S, NS, args.p_transit, args.p_stub, args.mean_inter, args.weights, seed)
        base = gen_transit_stub(params)
        rng = SplitMix64(seed)
        for x, y in classes:
            net = sample_cf(base, x, y, rng.derive(f"classes:C{x},F{y}"))
            cls = f"C{x},F{y}"
            name = out / f"{args.stem}_T{T}_NT{NT}_S{S}_NS{NS}_C{x}F{y}_seed{seed}.dpfl"
            comments = [f"class={cls}", f"seed={seed}", f"params=T{T},NT{NT},S{S},NS{NS},{args.weights}"]
            name.write_text(dump_network(net, comments))
            print(
                f"{name} vertices={net.vertex_count} arcs={len(net.arcs)} "
                f"customers={len(net.customers)} facilities={len(net.facilities)}"
            )
        if args.demands:
            dm = gravitational_demands(base, rng.derive("demands"))
            dname = out / f"{args.stem}_T{T}_NT{NT}_S{S}_NS{NS}_seed{seed}.demands"
            dname.write_text(dump_demands(dm))
    return EXIT_OK


# ---------------------------------------------------------------------------
# triples


def cmd_triples(args) -> int:
    net, _ = _read_instance(args.instance)
    start = time.perf_counter()
    ts = generate_triples(net, args.mode, two_pass=args.two_pass)
    elapsed = time.perf_counter() - start
    st = triple_stats(ts, net)
    print(f"mode={args.mode} {st}")
    if args.timing:
        print(f"seconds={elapsed:.3f}", file=sys.stderr)
    if args.out:
        _write(args.out, dump_triples(ts))
    return EXIT_OK


# ---------------------------------------------------------------------------
# solve


def _bounds(net: Network, inst: ScpInstance, mode: str, want: bool) -> tuple:
    hslb = feas = updfl = None
    if not want:
        return hslb, feas, updfl
    if mode == "set":
        res = exact_hitting_set(build_hslb_instance(net), inst, node_limit=200000)
        hslb = res.value if res.optimal else res.lower_bound
        feas = res.feasible if res.optimal else None
    elif check_symmetric(net)[0] and net.customers:
        updfl = updfl_lower_bound(net).value
    return hslb, feas, updfl


def cmd_solve(args) -> int:
    net, meta = _read_instance(args.instance)
    if args.algorithm in SET_ONLY and args.mode != "set":
        raise UsageError(f"{args.algorithm} is only defined for --mode set")
    ts = generate_triples(net, args.mode)
    inst = ScpInstance.from_network(net, ts)
    if args.lp:
        export_mip_lp(inst, args.lp)
    start = time.perf_counter()
    ga = {}
    if args.population is not None:
        ga["population"] = args.population
    if args.stall is not None:
        ga["stall_limit"] = args.stall
    try:
        out = run_algorithm(
            inst,
            args.algorithm,
            iterations=args.iterations,
            seed=args.seed,
            t=args.t,
            workers=args.jobs,
            portfolio=args.portfolio,
            node_limit=args.node_limit,
            time_limit=args.time_limit,
            ga=ga,
        )
    except ValueError as exc:
        if isinstance(exc, InfeasibleError):
            raise
        raise UsageError(str(exc)) from None
    elapsed = time.perf_counter() - start
    ok, missing = validate_cover(inst, out.cover)
    if not ok:
        print(f"error: produced cover misses customer {missing}", file=sys.stderr)
        return EXIT_INFEASIBLE
    labels = tuple(inst.labels(out.cover))
    hslb, feas, updfl = _bounds(net, inst, args.mode, not args.no_bounds)
    algo = args.algorithm if args.algorithm != "portfolio" else f"portfolio:{args.portfolio}"
    rep = SolveReport(
        instance=os.path.basename(args.instance),
        instance_hash=instance_hash(net),
        instance_class=meta.get("class", "unclassified"),
        vertices=net.vertex_count,
        customers=len(net.customers),
        facilities=len(net.facilities),
        mode=args.mode,
        algorithm=algo,
        seed=args.seed,
        triples=len(ts),
        size=len(labels),
        cover=labels,
        status=out.status,
        iterations=out.iterations,
        best_iteration=out.best_index,
        histogram=histogram(out.sizes),
        hslb=hslb,
        hslb_feasible=feas,
        updfl=updfl,
        extra={k: str(v) for k, v in out.extra.items()},
    )
    for bound in (hslb, updfl):
        if bound is not None and bound > rep.size:
            print(f"error: lower bound {bound} exceeds cover size {rep.size}", file=sys.stderr)
            return EXIT_INFEASIBLE
    _write(args.report, rep.render())
    if args.out:
        comments = {"seed": args.seed, "mode": args.mode, "algorithm": algo, "best_iteration": out.best_index}
        _write(args.out, dump_solution(labels, comments))
    if args.timing:
        print(f"seconds={elapsed:.3f}", file=sys.stderr)
    return EXIT_OK if out.status != "budget_exceeded" else EXIT_INFEASIBLE


# ---------------------------------------------------------------------------
# bound


def cmd_bound(args) -> int:
    net, _ = _read_instance(args.instance)
    if args.bound == "hslb":
        hs = build_hslb_instance(net)
        if args.lp:
            export_hslb_lp(hs, args.lp)
        inst = ScpInstance.from_network(net, generate_triples(net, "set"))
        res = exact_hitting_set(hs, inst, node_limit=args.node_limit)
        print(res.line())
        print("witness " + " ".join(map(str, res.members)))
        if not res.optimal:
            print(f"status=budget_exceeded lower_bound={res.lower_bound}")
            return EXIT_INFEASIBLE
        return EXIT_OK
    ok, bad = check_symmetric(net)
    if not ok:
        raise InstanceError(f"updfl needs a symmetric network, arc {bad[0]} has no partner")
    res = updfl_lower_bound(net)
    print(f"updfl {res.value}")
    print("witness " + " ".join(map(str, res.cover)))
    return EXIT_OK


# ---------------------------------------------------------------------------
# report and prob


def cmd_report(args) -> int:
    paths = []
    for p in args.paths:
        path = Path(p)
        paths += sorted(path.glob("*.rep")) if path.is_dir() else [path]
    if not paths:
        raise UsageError("no report files found")
    reports = [SolveReport.parse(p.read_text()) for p in paths]
    _write(args.out, reduction_table(reports))
    return EXIT_OK


def cmd_prob(args) -> int:
    if args.table:
        sys.stdout.write(robustness_table(R=args.R))
        return EXIT_OK
    if args.k is None:
        raise UsageError("give --k or --table")
    try:
        p = robustness_failure_prob(args.k, args.R, args.N)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(f"{p:.8f}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pairfl", description="Set cover by pairs and disjoint-path facility location.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write synthetic transit-stub instances")
    g.add_argument("--size", type=int, help=f"size class, one of {sorted(SIZE_CLASSES)}")
    g.add_argument("--T", type=int)
    g.add_argument("--NT", type=int)
    g.add_argument("--S", type=int)
    g.add_argument("--NS", type=int)
    g.add_argument("--p-transit", type=float, default=0.6)
    g.add_argument("--p-stub", type=float, default=0.42)
    g.add_argument("--mean-inter", type=float, default=2.0)
    g.add_argument("--weights", choices=WEIGHT_MODES, default="unit")
    g.add_argument("--class", dest="cls", action="append", help="customer/facility class such as C2,F1 (repeatable)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--count", type=int, default=1, help="number of consecutive seeds")
    g.add_argument("--demands", action="store_true", help="also write a gravity demand file")
    g.add_argument("--fixture", choices=("fig4", "fig5"), help="write a worst-case bound fixture instead")
    g.add_argument("--n", type=int, default=9, help="fixture size parameter")
    g.add_argument("--out", default=".")
    g.add_argument("--stem", default="ts")
    g.set_defaults(func=cmd_generate)

    t = sub.add_parser("triples", help="build the covering triples of an instance")
    t.add_argument("instance")
    t.add_argument("--mode", choices=MODES, default="set")
    t.add_argument("--two-pass", action="store_true", help="count first, then fill an exact-size buffer")
    t.add_argument("--out", help="write the triple list here")
    t.add_argument("--timing", action="store_true", help="print elapsed seconds on stderr")
    t.set_defaults(func=cmd_triples)

    s = sub.add_parser("solve", help="find a cover")
    s.add_argument("instance")
    s.add_argument("--mode", choices=MODES, default="set")
    s.add_argument("--algorithm", choices=ALGORITHMS, default="greedy")
    s.add_argument("--portfolio", help="mix such as shs:200+greedy:200 (with --algorithm portfolio)")
    s.add_argument("--iterations", type=int, default=400)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--t", default="half", help="DHS goodness threshold, an integer or 'half'")
    s.add_argument("--jobs", type=int, default=1, help="worker processes for heuristic iterations")
    s.add_argument("--population", type=int, help="genetic population (default min(300,|F|))")
    s.add_argument("--stall", type=int, help="genetic stall generations (default |V|)")
    s.add_argument("--node-limit", type=int, help="exact search node budget")
    s.add_argument("--time-limit", type=float, help="exact search time budget in seconds")
    s.add_argument("--no-bounds", action="store_true", help="skip the lower bounds in the report")
    s.add_argument("--lp", help="also export the integer program in LP format")
    s.add_argument("--out", help="solution file")
    s.add_argument("--report", help="report file (default stdout)")
    s.add_argument("--timing", action="store_true", help="print elapsed seconds on stderr")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bound", help="lower bounds")
    b.add_argument("instance")
    b.add_argument("--bound", choices=("hslb", "updfl"), default="hslb")
    b.add_argument("--node-limit", type=int)
    b.add_argument("--lp", help="export the hitting-set program in LP format")
    b.set_defaults(func=cmd_bound)

    r = sub.add_parser("report", help="cost-reduction table from solve reports")
    r.add_argument("paths", nargs="+", help="report files or directories of *.rep files")
    r.add_argument("--out")
    r.set_defaults(func=cmd_report)

    q = sub.add_parser("prob", help="chance that N more runs all miss, given k hits in R")
    q.add_argument("--k", type=int)
    q.add_argument("--R", type=int, default=400)
    q.add_argument("--N", type=int, default=400)
    q.add_argument("--table", action="store_true", help="print the k=1..15 table")
    q.set_defaults(func=cmd_prob)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help or a usage error
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (InstanceError, FileNotFoundError) as exc:
        print(f"invalid instance: {exc}", file=sys.stderr)
        return EXIT_INSTANCE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
