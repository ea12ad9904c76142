"""Solution files, key=value solve reports, summary tables and run statistics."""

from __future__ import annotations

import hashlib
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from statistics import mean

from .graph import Network, dump_network

MODE_ORDER = ("set", "path-vertex", "path-arc")


def instance_hash(net: Network) -> str:
    return hashlib.sha256(dump_network(net).encode("ascii")).hexdigest()[:16]


# ---------------------------------------------------------------------------
# solution files


def dump_solution(cover, comments: dict | None = None) -> str:
    lines = [f"# {k}={v}" for k, v in (comments or {}).items()]
    lines.append(f"s {len(cover)}")
    lines += [f"v {f}" for f in cover]
    return "\n".join(lines) + "\n"


def load_solution(text: str) -> tuple[list[int], dict]:
    """(facility ids, comment key=value pairs); checks the declared size."""
    size = None
    cover: list[int] = []
    meta: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, sep, val = line[1:].strip().partition("=")
            if sep:
                meta[key.strip()] = val.strip()
            continue
        tok = line.split()
        if tok[0] == "s" and len(tok) == 2:
            size = int(tok[1])
        elif tok[0] == "v" and len(tok) == 2:
            cover.append(int(tok[1]))
        else:
            raise ValueError(f"line {lineno}: unexpected {line!r}")
    if size is None or size != len(cover):
        raise ValueError(f"solution declares size {size} but lists {len(cover)} facilities")
    return cover, meta


# ---------------------------------------------------------------------------
# solve reports


@dataclass
class SolveReport:
    """One solver run.  Rendered as ``key=value`` lines in a fixed key order."""

    instance: str
    instance_hash: str
    instance_class: str
    vertices: int
    customers: int
    facilities: int
    mode: str
    algorithm: str
    seed: int
    triples: int
    size: int
    cover: tuple[int, ...]
    status: str = "ok"
    iterations: int = 0
    best_iteration: int | None = None
    histogram: dict[int, int] = field(default_factory=dict)
    hslb: int | None = None
    hslb_feasible: bool | None = None
    updfl: int | None = None
    extra: dict[str, str] = field(default_factory=dict)

    KEYS = (
        "instance",
        "instance_hash",
        "instance_class",
        "vertices",
        "customers",
        "facilities",
        "mode",
        "algorithm",
        "seed",
        "triples",
        "size",
        "cover",
        "status",
        "iterations",
        "best_iteration",
        "histogram",
        "hslb",
        "hslb_feasible",
        "updfl",
    )

    def render(self) -> str:
        out = []
        for key in self.KEYS:
            out.append(f"{key}={_fmt(key, getattr(self, key))}")
        for key in sorted(self.extra):
            out.append(f"x.{key}={self.extra[key]}")
        return "\n".join(out) + "\n"

    @classmethod
    def parse(cls, text: str) -> "SolveReport":
        raw: dict[str, str] = {}
        extra: dict[str, str] = {}
        for line in text.splitlines():
            if not line.strip():
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise ValueError(f"not a key=value line: {line!r}")
            if key.startswith("x."):
                extra[key[2:]] = val
            else:
                raw[key] = val
        missing = [k for k in cls.KEYS if k not in raw]
        if missing:
            raise ValueError(f"report lacks {missing}")
        vals = {k: _unfmt(k, raw[k]) for k in cls.KEYS}
        return cls(**vals, extra=extra)


_INT_KEYS = {"vertices", "customers", "facilities", "seed", "triples", "size", "iterations"}
_OPT_INT_KEYS = {"best_iteration", "hslb", "updfl"}


def _fmt(key: str, val) -> str:
    if val is None:
        return "-"
    if key == "cover":
        return " ".join(map(str, val))
    if key == "histogram":
        return ",".join(f"{k}:{v}" for k, v in sorted(val.items()))
    if key == "hslb_feasible":
        return "yes" if val else "no"
    return str(val)


def _unfmt(key: str, text: str):
    if key in _INT_KEYS:
        return int(text)
    if text == "-":
        return None
    if key in _OPT_INT_KEYS:
        return int(text)
    if key == "cover":
        return tuple(int(x) for x in text.split())
    if key == "histogram":
        return {int(a): int(b) for a, b in (p.split(":") for p in text.split(",") if p)}
    if key == "hslb_feasible":
        return text == "yes"
    return text


def histogram(sizes) -> dict[int, int]:
    return dict(sorted(Counter(sizes).items()))


def verify_report(rep: SolveReport, net: Network) -> None:
    """The report belongs to ``net`` and its cover is valid for its mode."""
    from .scp import ScpInstance, validate_cover
    from .triples import generate_triples

    if instance_hash(net) != rep.instance_hash:
        raise ValueError("report was produced for a different instance")
    inst = ScpInstance.from_network(net, generate_triples(net, rep.mode))
    ok, missing = validate_cover(inst, inst.indices(rep.cover))
    if not ok:
        raise ValueError(f"stored cover leaves customer {missing} uncovered")
    if len(rep.cover) != rep.size:
        raise ValueError("stored size disagrees with the cover")


# ---------------------------------------------------------------------------
# cost-reduction table


def reduction_table(reports: list[SolveReport]) -> str:
    """Average cover size as a percentage of |C|, per class and mode.

    For each instance and mode the smallest reported cover counts.  The
    number in parentheses after a mode is the mean over instances of the
    percentage reduction from the previous mode present.
    """
    if not reports:
        raise ValueError("no reports")
    best: dict[tuple, SolveReport] = {}
    for r in reports:
        key = (r.instance_hash, r.mode)
        if key not in best or r.size < best[key].size:
            best[key] = r
    classes: dict[tuple, dict[str, dict[str, SolveReport]]] = defaultdict(lambda: defaultdict(dict))
    for (h, mode), r in best.items():
        classes[(r.vertices, r.instance_class)][h][mode] = r
    modes = [m for m in MODE_ORDER if any(m == k[1] for k in best)]
    head = ["|V|", "class", "n"]
    for i, m in enumerate(modes):
        head.append(m if i == 0 else f"{m} (red%)")
    rows = [head]
    for (nv, cls) in sorted(classes):
        per_inst = classes[(nv, cls)]
        row = [str(nv), cls, str(len(per_inst))]
        for i, m in enumerate(modes):
            pct = [100.0 * r[m].size / r[m].customers for r in per_inst.values() if m in r]
            cell = f"{mean(pct):.1f}" if pct else "-"
            if i > 0:
                prev = modes[i - 1]
                red = [
                    100.0 * (r[prev].size - r[m].size) / r[prev].size
                    for r in per_inst.values()
                    if m in r and prev in r and r[prev].size
                ]
                if red:
                    cell += f" ({mean(red):.1f})"
            row.append(cell)
        rows.append(row)
    widths = [max(len(r[i]) for r in rows) for i in range(len(head))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows) + "\n"


# ---------------------------------------------------------------------------
# robustness


def robustness_failure_prob(k: int, R: int = 400, N: int = 400) -> float:
    """Chance that N further runs all miss, if k of R runs hit: ((R-k)/R)^N."""
    if R < 1 or not 0 <= k <= R or N < 0:
        raise ValueError("need R >= 1, 0 <= k <= R and N >= 0")
    return ((R - k) / R) ** N


def robustness_table(ks=range(1, 16), Ns=(100, 200, 400, 800, 1600), R: int = 400) -> str:
    lines = ["k " + " ".join(f"N={n:<10}" for n in Ns).rstrip()]
    for k in ks:
        lines.append(f"{k} " + " ".join(f"{robustness_failure_prob(k, R, n):.8f}  " for n in Ns).rstrip())
    return "\n".join(lines) + "\n"
