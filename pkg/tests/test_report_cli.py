import subprocess
import sys

import pytest

from pairfl.cli import main
from pairfl.exact import brute_force_optimum
from pairfl.graph import dump_network, load_network
from pairfl.report import (
    SolveReport,
    dump_solution,
    load_solution,
    reduction_table,
    robustness_failure_prob,
    robustness_table,
    verify_report,
)
from pairfl.scp import ScpInstance
from pairfl.special import build_fig4_fixture, build_fig5_fixture, tree_optimum
from pairfl.triples import generate_triples

from netgen import random_symmetric, random_tree


def make_report(**kw):
    base = dict(
        instance="a.dpfl",
        instance_hash="0123456789abcdef",
        instance_class="C1,F1",
        vertices=50,
        customers=100,
        facilities=100,
        mode="set",
        algorithm="greedy",
        seed=0,
        triples=10,
        size=16,
        cover=tuple(range(16)),
    )
    base.update(kw)
    return SolveReport(**base)


def write_net(path, net, comments=()):
    path.write_text(dump_network(net, list(comments)))
    return str(path)


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


# -- reports -----------------------------------------------------------------


def test_report_round_trip():
    rep = make_report(histogram={16: 3, 17: 1}, hslb=12, hslb_feasible=False, best_iteration=4, extra={"t": "7"})
    text = rep.render()
    assert SolveReport.parse(text) == rep
    assert SolveReport.parse(text).render() == text
    bare = make_report()
    assert SolveReport.parse(bare.render()) == bare
    assert "updfl=-" in bare.render()


def test_report_parse_errors():
    with pytest.raises(ValueError):
        SolveReport.parse("size=3\n")
    with pytest.raises(ValueError):
        SolveReport.parse("nonsense\n")


def test_solution_round_trip():
    text = dump_solution((3, 1, 4), {"seed": 2})
    assert load_solution(text) == ([3, 1, 4], {"seed": "2"})
    with pytest.raises(ValueError):
        load_solution("s 2\nv 1\n")


def test_reduction_single():
    table = reduction_table([make_report()])
    assert "16.0" in table.splitlines()[1]
    with pytest.raises(ValueError):
        reduction_table([])


def test_reduction_column():
    set_sizes = [17, 14, 13, 19, 21, 19, 16, 14, 13, 16]
    path_sizes = [17, 11, 12, 19, 20, 17, 14, 12, 13, 16]
    reps = []
    for i, (a, b) in enumerate(zip(set_sizes, path_sizes)):
        h = f"{i:016x}"
        reps.append(make_report(instance_hash=h, size=a, cover=tuple(range(a))))
        reps.append(make_report(instance_hash=h, size=b, cover=tuple(range(b)), mode="path-vertex"))
    row = reduction_table(reps).splitlines()[1].split()
    assert row[3:] == ["16.2", "15.1", "(7.1)"]


def test_reduction_keeps_best_per_instance():
    reps = [make_report(size=20, cover=tuple(range(20))), make_report(size=16)]
    assert "16.0" in reduction_table(reps)


def test_robustness_prob():
    assert f"{robustness_failure_prob(1, 400, 100):.8f}" == "0.77855704"
    assert f"{robustness_failure_prob(5, 400, 400):.8f}" == "0.00652893"
    assert robustness_failure_prob(400, 400, 1) == 0
    for bad in ((-1, 400, 1), (401, 400, 1), (1, 0, 1), (1, 400, -1)):
        with pytest.raises(ValueError):
            robustness_failure_prob(*bad)
    assert len(robustness_table().splitlines()) == 16


# -- CLI -----------------------------------------------------------------------


def test_generate(tmp_path, capsys):
    code, out, _ = run(capsys, "generate", "--T", 1, "--NT", 2, "--S", 3, "--NS", 8, "--class", "C1,F1", "--seed", 7, "--out", tmp_path)
    assert code == 0
    files = list(tmp_path.glob("*.dpfl"))
    assert len(files) == 1 and "seed7" in files[0].name
    assert load_network(files[0].read_text()).vertex_count == 50

    d = tmp_path / "c8"
    assert main(["generate", "--size", "50", "--class", "C8,F8", "--seed", "7", "--out", str(d)]) == 0
    net = load_network(next(d.glob("*.dpfl")).read_text())
    assert len(net.customers) == len(net.facilities) == 7

    d = tmp_path / "ten"
    assert main(["generate", "--size", "50", "--count", "10", "--demands", "--out", str(d)]) == 0
    files = sorted(d.glob("*.dpfl"))
    assert len(files) == 10 and len({f.read_text() for f in files}) == 10
    assert len(list(d.glob("*.demands"))) == 10


def test_generate_fixture(tmp_path, capsys):
    assert run(capsys, "generate", "--fixture", "fig5", "--n", 4, "--out", tmp_path)[0] == 0
    path = next(tmp_path.glob("*.dpfl"))
    code, out, _ = run(capsys, "bound", path, "--bound", "updfl")
    assert code == 0 and out.splitlines()[0] == "updfl 2"


def test_solve_fig4(tmp_path, capsys):
    inst = write_net(tmp_path / "f4.dpfl", build_fig4_fixture(9, validate=False), ["class=fixture"])
    rep_path = tmp_path / "f4.rep"
    sol_path = tmp_path / "f4.sol"
    code, _, _ = run(capsys, "solve", inst, "--mode", "set", "--algorithm", "greedy", "--report", rep_path, "--out", sol_path)
    assert code == 0
    rep = SolveReport.parse(rep_path.read_text())
    assert rep.size == 9 and rep.iterations == 400 and rep.hslb == 3 and rep.hslb_feasible is False
    assert sum(rep.histogram.values()) == 400
    verify_report(rep, load_network((tmp_path / "f4.dpfl").read_text()))
    cover, meta = load_solution(sol_path.read_text())
    assert list(rep.cover) == cover and meta["algorithm"] == "greedy"
    code, out, _ = run(capsys, "bound", inst, "--bound", "hslb")
    assert out.splitlines()[0] == "hslb 3 feasible=no"


def test_verify_report_detects_tampering(tmp_path, capsys):
    net = build_fig4_fixture(4, validate=False)
    inst = write_net(tmp_path / "a.dpfl", net)
    code, out, _ = run(capsys, "solve", inst, "--iterations", 5)
    rep = SolveReport.parse(out)
    assert rep.instance_class == "unclassified"
    verify_report(rep, net)
    with pytest.raises(ValueError):
        verify_report(make_report(instance_hash=rep.instance_hash, cover=rep.cover[1:], size=rep.size - 1), net)
    with pytest.raises(ValueError):
        verify_report(rep, build_fig4_fixture(5, validate=False))


def test_solve_exact_matches_brute(tmp_path, capsys):
    net = random_symmetric(5, n_min=10, n_max=10)
    inst = write_net(tmp_path / "r.dpfl", net)
    code, out, _ = run(capsys, "solve", inst, "--mode", "path-vertex", "--algorithm", "exact", "--lp", tmp_path / "r.lp")
    rep = SolveReport.parse(out)
    scp = ScpInstance.from_network(net, generate_triples(net, "path-vertex"))
    assert code == 0 and rep.status == "optimal" and rep.size == len(brute_force_optimum(scp))
    assert rep.updfl is not None and rep.updfl <= rep.size
    assert (tmp_path / "r.lp").read_text().startswith("\\")


def test_heuristics_above_hslb(tmp_path, capsys):
    assert main(["generate", "--size", "50", "--seed", "3", "--out", str(tmp_path)]) == 0
    capsys.readouterr()
    path = next(tmp_path.glob("*.dpfl"))
    for algo in (["shs"], ["dhs", "--t", "1"], ["greedy"], ["genetic", "--stall", "5"], ["portfolio", "--portfolio", "shs:20+greedy:20"]):
        code, out, _ = run(capsys, "solve", path, "--iterations", 20, "--algorithm", *algo)
        rep = SolveReport.parse(out)
        assert code == 0 and rep.hslb <= rep.size


def test_bound_tree(tmp_path, capsys):
    for seed in range(5):
        net = random_tree(seed)
        net = net.with_classes(net.customers, net.customers)
        inst = write_net(tmp_path / f"t{seed}.dpfl", net)
        code, out, _ = run(capsys, "bound", inst, "--bound", "updfl")
        assert int(out.split()[1]) == len(tree_optimum(net))


def test_report_command(tmp_path, capsys):
    for name in ("a", "b"):
        (tmp_path / f"{name}.rep").write_text(make_report(instance_hash=name * 16).render())
    code, out, _ = run(capsys, "report", tmp_path)
    assert code == 0 and "16.0" in out
    assert run(capsys, "report", tmp_path / "empty")[0] == 2


def test_prob_command(capsys):
    assert run(capsys, "prob", "--k", 1, "--N", 100)[1] == "0.77855704\n"
    assert run(capsys, "prob", "--k", 500)[0] == 1
    assert run(capsys, "prob")[0] == 1


def test_exit_codes(tmp_path, capsys):
    net = build_fig4_fixture(4, validate=False)
    inst = write_net(tmp_path / "a.dpfl", net)
    assert run(capsys, "solve", inst, "--bogus")[0] == 1
    assert run(capsys, "solve", inst, "--mode", "path-arc", "--algorithm", "shs")[0] == 1
    assert run(capsys, "solve", tmp_path / "missing.dpfl")[0] == 2
    (tmp_path / "bad.dpfl").write_text("p 2\na 0 1 1\n")
    assert run(capsys, "solve", tmp_path / "bad.dpfl")[0] == 2
    (tmp_path / "open.dpfl").write_text("p dpfl 2 2\na 0 1 1\na 1 0 1\nc 0\nf 1\n")
    assert run(capsys, "solve", tmp_path / "open.dpfl")[0] == 2
    code, out, _ = run(capsys, "solve", inst, "--algorithm", "exact", "--node-limit", 0)
    assert code == 3 and "status=budget_exceeded" in out


def test_console_script(tmp_path):
    net = build_fig4_fixture(4, validate=False)
    inst = write_net(tmp_path / "a.dpfl", net)
    cmd = [sys.executable, "-m", "pairfl.cli"]
    one = subprocess.run(cmd + ["solve", inst, "--iterations", "40", "--jobs", "1"], capture_output=True, text=True)
    many = subprocess.run(cmd + ["solve", inst, "--iterations", "40", "--jobs", "4"], capture_output=True, text=True)
    assert one.returncode == many.returncode == 0
    assert one.stdout == many.stdout
    bad = subprocess.run(cmd + ["nonsense"], capture_output=True, text=True)
    assert bad.returncode == 1
