import math

import numpy as np
import pytest

from girgfpp.dist import Deterministic, Exponential, Uniform
from girgfpp.fpp import assign_edge_lengths
from girgfpp.genmodel import GirgParams, generate_coupled, generate_girg
from girgfpp.graph import SpatialGraph
from girgfpp.perc import PercolationRule, mapped_weight, percolate, threshold
from girgfpp.rng import stream
from girgfpp.spatial import ContractError, PointSet

EXP = Exponential(1.0)


def two_vertex(w1, w2):
    return SpatialGraph(PointSet(np.array([[-0.1], [0.1]])), [w1, w2], [(0, 1)])


def test_rule_validation():
    with pytest.raises(ValueError):
        PercolationRule(0.0, 0.5, EXP)
    with pytest.raises(ValueError):
        PercolationRule(2.0, 0.5, EXP, alpha=1.95)
    with pytest.raises(ValueError):
        PercolationRule(1.0, 1.0, EXP)


def test_threshold_examples():
    r = PercolationRule(1.0, 0.5, EXP)
    assert threshold(r, 1.0, 1.0) == math.inf
    # closed form of the exponential quantile at exp(-2)
    assert threshold(r, math.e, math.e) == pytest.approx(-math.log1p(-math.exp(-2)), rel=1e-12)
    assert threshold(r, math.e, math.e) == pytest.approx(0.14541, abs=1e-5)
    assert threshold(PercolationRule(1.0, 0.5, Uniform(0, 1)), 1.0, 1.0) == 1.0
    with pytest.raises(ValueError):
        threshold(r, 0.5, 2.0)


def test_threshold_monotone_in_weight():
    r = PercolationRule(0.9, 0.5, EXP)
    w = np.geomspace(1, 1e6, 200)
    for w2 in (1.0, 3.0, 100.0):
        t = threshold(r, w, w2)
        assert np.all(np.diff(t) <= 0)


def _graph(n=5000, seed=3):
    g = generate_girg(GirgParams(d=2, alpha=1.95), n, seed=seed)
    return assign_edge_lengths(g, EXP, seed)


def test_keep_set_brute_force():
    g = _graph(2000)
    r = PercolationRule(0.9, 0.5, EXP)
    h = percolate(g, r)
    expect = set()
    for (u, v), L in zip(g.edges.tolist(), g.lengths):
        q = math.exp(-0.9 * math.sqrt(math.log(g.weights[u])) - 0.9 * math.sqrt(math.log(g.weights[v])))
        thr = math.inf if q >= 1 else -math.log1p(-q)
        if L <= thr:
            expect.add((u, v))
    assert set(map(tuple, h.edges.tolist())) == expect
    assert h.n == g.n
    assert h.provenance["percolation"]["c"] == 0.9


def test_trivial_keeps():
    g = _graph(2000)
    assert percolate(g, PercolationRule(1e-12, 0.5, EXP)).m == g.m
    ones = SpatialGraph(g.points, np.ones(g.n), g.edges, g.lengths, g.provenance, g.keys)
    assert percolate(ones, PercolationRule(1.5, 0.5, EXP)).m == g.m


def test_contract_errors():
    g = _graph(500)
    with pytest.raises(ContractError):
        percolate(g, PercolationRule(0.5, 0.5, Deterministic(1.0)))
    with pytest.raises(ContractError):
        percolate(generate_girg(GirgParams(d=2), 100, seed=0), PercolationRule(0.5, 0.5, EXP))


def test_keep_rate_over_seeds():
    w1, w2, c = 20.0, 7.0, 0.8
    r = PercolationRule(c, 0.5, EXP)
    g = two_vertex(w1, w2)
    N = 100_000
    kept = sum(percolate(assign_edge_lengths(g, EXP, s), r).m for s in range(N))
    p = float(EXP.cdf(threshold(r, w1, w2)))
    se = math.sqrt(p * (1 - p) / N)
    assert abs(kept / N - p) <= 3 * se
    floor = math.exp(-c * math.sqrt(math.log(w1)) - c * math.sqrt(math.log(w2)))
    assert p >= floor - 1e-12


def test_percolation_commutes_with_coupling():
    cg = generate_coupled(GirgParams(d=2, alpha=1.95), 2000, 11)
    r = PercolationRule(0.9, 0.5, EXP)
    small = percolate(assign_edge_lengths(cg.at(0.9), EXP, 5), r)
    big = percolate(assign_edge_lengths(cg.at(1.0), EXP, 5), r)
    ks = {tuple(sorted(x)) for x in small.keys[small.edges].tolist()}
    kb = {tuple(sorted(x)) for x in big.keys[big.edges].tolist()}
    assert ks <= kb


def test_mapped_weight():
    assert mapped_weight(1.0, 0.5, 1.95, 0.5) == 1.0
    assert mapped_weight(math.e, 1.95, 1.95, 0.5) == pytest.approx(1.0)
    w = np.geomspace(1e3, 1e12, 300)
    m = mapped_weight(w, 0.975, 1.95, 0.5)
    assert np.all(np.diff(m) >= 0)
    assert np.all(np.log(m) >= (1 - 0.5) * np.log(w) - 1e-12)
    with pytest.raises(ValueError):
        mapped_weight(0.5, 0.5, 1.95, 0.5)
    with pytest.raises(ValueError):
        mapped_weight(2.0, 2.5, 1.95, 0.5)
