import math
from fractions import Fraction
from functools import lru_cache

import numpy as np
import pytest

from ifprocess.errors import DegenerateRegime, TooLarge
from ifprocess.kneser import (
    CONSTANT_C, SMALL_K, build_kneser, codegree_profile, complete_graph, empty_graph,
    graph_from_edges, greedy_independent, kneser_params, petersen_graph, r_end, trajectory_check,
    write_trajectory_csv,
)
from ifprocess.rng import make_rng, trial_rng
from ifprocess.setcore import binom, intersects, KSet


def test_build_sizes():
    P = petersen_graph()
    assert P.N == 10 and P.regular_degree == 3
    G = build_kneser(16, 6)
    assert G.N == 8008 and G.regular_degree == 210
    M = build_kneser(8, 4)
    assert M.regular_degree == 1
    with pytest.raises(TooLarge):
        build_kneser(30, 10)


def test_trivial_graphs():
    rng = make_rng(0)
    assert greedy_independent(complete_graph(7), rng).size == 1
    tr = greedy_independent(empty_graph(9), rng)
    assert tr.size == 9
    assert tr.V_size == list(range(9, -1, -1))
    # t stays 0 when d = 0, so the deviation after r steps is r/N
    rep = trajectory_check(tr)
    assert rep["sup_V_dev"] == 1.0 and rep["V_dev_quantiles"][0] == pytest.approx(0.5)
    with pytest.raises(ValueError):
        graph_from_edges(3, [(1, 1)])


def _exact_final_size_law(G):
    N = G.N
    nbr = [sum(1 << int(u) for u in G.neighbors(v)) | (1 << v) for v in range(N)]

    @lru_cache(maxsize=None)
    def rec(avail):
        if not avail:
            return {0: Fraction(1)}
        live = [v for v in range(N) if avail >> v & 1]
        out = {}
        for v in live:
            for s, p in rec(avail & ~nbr[v]).items():
                out[s + 1] = out.get(s + 1, 0) + p / len(live)
        return out

    return rec((1 << N) - 1)


def test_petersen_final_size_vs_exact_chain():
    G = petersen_graph()
    exact = _exact_final_size_law(G)
    assert set(exact) == {3, 4} and sum(exact.values()) == 1
    runs = 10**5
    rng = make_rng(5)
    fours = sum(greedy_independent(G, rng, tracked_sample_size=0).size == 4 for _ in range(runs))
    assert abs(fours / runs - float(exact[4])) <= 0.01


def test_params():
    p = kneser_params(16, 6)
    assert p.N == 8008 and p.d == 210
    assert p.gamma == pytest.approx(210 / 8008, rel=1e-12)
    assert p.p_N > p.p_d
    assert 0 < p.epsilon <= p.eps1 and p.epsilon <= p.eps2
    c = 0.25
    assert kneser_params(400, 100).p_N - kneser_params(400, 100).p_d > 0
    assert kneser_params(400, 100).c == c
    small = kneser_params(10**4, 300)
    assert abs(math.log(small.gamma) / (-(0.03 ** 2) * 10**4) - 1) < 0.05
    assert small.delta == pytest.approx(0.9 * 0.03)
    mid = kneser_params(200, 10)
    assert mid.alpha == pytest.approx(binom(190, 10) * math.exp(-0.9 * 0.05 ** 2 * 200))
    dl = 0.045
    assert mid.beta == pytest.approx(math.exp((dl * math.log(0.05 / dl ** 2) + 2 * dl - dl ** 2 / 0.05) * 200))
    for n, k in [(10, 5), (10, 0), (10, 7)]:
        with pytest.raises(DegenerateRegime):
            kneser_params(n, k)


def test_codegree_profile():
    rep = codegree_profile(16, 6, check_pairs=100, rng=make_rng(2))
    h = rep["histogram"]
    assert h[5]["codegree"] == 84
    assert h[0]["codegree"] == binom(16 - 12, 6) == 0
    assert sum(x["count"] for x in h.values()) == 8007
    assert "heavy_ok" in rep
    assert codegree_profile(12, 3, rng=make_rng(1))["histogram"][0]["codegree"] == binom(6, 3)


def test_r_end_values():
    p = kneser_params(16, 6)
    g = 210 / 8008
    raw = 0.001 / g * math.log(1 / g)
    assert raw == pytest.approx(0.1389, abs=1e-4)
    assert r_end(p, SMALL_K) == math.floor(raw) == 0
    assert r_end(p, CONSTANT_C) == math.floor(p.epsilon / 1000 * 8008 * math.log(8008) / 210)
    # substituting gamma = d/N: the two formulas differ by eps * log N versus log(1/gamma)
    ratio = (p.epsilon * math.log(p.N)) / math.log(1 / p.gamma)
    assert ratio == pytest.approx(r_end_raw(p, CONSTANT_C) / r_end_raw(p, SMALL_K))
    with pytest.raises(ValueError):
        r_end(p, "Other")


def r_end_raw(p, regime):
    if regime == CONSTANT_C:
        return p.epsilon / 1000 * p.N * math.log(p.N) / p.d
    return 0.001 / p.gamma * math.log(1 / p.gamma)


def test_kneser_runs(tmp_path):
    G = build_kneser(16, 6)
    p = kneser_params(16, 6)
    sizes, sups = [], []
    for i in range(20):
        tr = greedy_independent(G, trial_rng(3, i))
        fam = [KSet.from_mask(int(G.masks[v]), 16) for v in tr.chosen]
        assert all(intersects(a, b) for j, a in enumerate(fam) for b in fam[:j])
        assert all(np.diff(tr.V_size) < 0)
        rep = trajectory_check(tr, p)
        assert tr.V_size[0] == 8008 and rep["steps"] == tr.size
        sizes.append(tr.size)
        sups.append(rep["sup_V_dev"])
        assert tr.size > 8008 / 211
    assert np.median(sizes) >= 2 * 8008 / 211
    assert np.median(sups) <= 0.10
    write_trajectory_csv(tr, tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert len(lines) == tr.size + 2
