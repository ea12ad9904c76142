import numpy as np
import pytest

from pairfl.exact import brute_force_optimum
from pairfl.genetic import GaParams, decode, evolve, random_genes
from pairfl.rng import SplitMix64
from pairfl.scp import ScpInstance, greedy_construct, validate_cover

from netgen import random_scp


def test_decode_examples():
    inst = random_scp(3)
    k = inst.n_facilities
    assert decode(inst, np.ones(k, dtype=bool)) == list(range(k))
    assert decode(inst, np.zeros(k, dtype=bool)) == sorted(greedy_construct(inst))
    opt = brute_force_optimum(inst)
    genes = np.zeros(k, dtype=bool)
    genes[list(opt)] = True
    assert decode(inst, genes) == list(opt)


def test_decode_length():
    inst = random_scp(3)
    with pytest.raises(ValueError):
        decode(inst, np.zeros(inst.n_facilities + 1, dtype=bool))


def test_params():
    p = GaParams(population=20, stall_limit=5)
    assert (p.n_elite, p.n_immigrants, p.n_crossovers) == (3, 2, 15)
    p = GaParams(population=7, stall_limit=5)
    assert p.n_elite + p.n_immigrants + p.n_crossovers == 7
    for bad in (dict(population=1), dict(elite_fraction=0.6, immigrant_fraction=0.5), dict(inherit_prob=1.0)):
        with pytest.raises(ValueError):
            GaParams(**{"population": 10, "stall_limit": 3, **bad})


def test_defaults():
    inst = random_scp(5)
    p = GaParams.defaults(inst)
    assert p.population == max(2, min(300, inst.n_facilities))
    assert p.stall_limit == inst.n_facilities


def test_random_genes_balanced():
    g = random_genes(SplitMix64(1), 4000)
    assert abs(g.mean() - 0.5) < 0.05


def test_full_set_optimum_stops_after_stall():
    # every facility is a customer with no pairs, so only S itself covers
    names = ["a", "b", "c", "d"]
    inst = ScpInstance.build(names, names, [])
    res = evolve(inst, GaParams(population=6, stall_limit=4, seed=2))
    assert res.size == 4 and res.generations == 4
    assert [line.split(",")[1] for line in res.log] == ["4"] * 5


@pytest.mark.parametrize("seed", range(40))
def test_evolve_properties(seed):
    inst = random_scp(seed)
    params = GaParams.defaults(inst, seed=seed)
    res = evolve(inst, params)
    assert validate_cover(inst, res.best)[0]
    best = [int(line.split(",")[1]) for line in res.log]
    assert all(a >= b for a, b in zip(best, best[1:]))
    assert best[-1] == res.size
    assert int(res.log[-1].split(",")[3]) == params.stall_limit
    assert res.size >= len(brute_force_optimum(inst))
    assert res.size <= len(greedy_construct(inst))
    assert evolve(inst, params).log == res.log


def test_often_optimal():
    hits = 0
    for seed in range(40):
        inst = random_scp(seed)
        hits += evolve(inst, GaParams.defaults(inst, seed=seed)).size == len(brute_force_optimum(inst))
    assert hits >= 30


def test_minimalize_final_option():
    inst = random_scp(11)
    params = GaParams.defaults(inst, seed=1, minimalize_final=True, max_generations=1)
    res = evolve(inst, params)
    assert res.generations <= 1 and validate_cover(inst, res.best)[0]
