import itertools
import math
import random

import pytest

from ifprocess.counting import (
    ProcessParams, count_open, family_size_asymptotic, indep_deg2_count, nu_asymptotic,
    nu_bounds,
)
from ifprocess.errors import (
    EmptyStableFamily, InfeasibleQuery, MOutOfRange, SNotDegreeTwoPlus, TooManyEdges,
)
from ifprocess.setcore import Hypergraph, binom


def brute_open(n, k, edges, fin=(), fout=()):
    fin, fout = set(fin), set(fout)
    cnt = 0
    for E in itertools.combinations(range(1, n + 1), k):
        s = set(E)
        if fin <= s and not (s & fout) and all(s & set(e) for e in edges):
            cnt += 1
    return cnt


def test_count_open_examples():
    assert count_open(Hypergraph(6, 2, [[1, 2]])) == 9
    assert count_open(Hypergraph(6, 2)) == 15
    assert count_open(Hypergraph(8, 3, [[1, 2, 3], [1, 4, 5]]), forced_in={1}) == 21


def test_count_open_fuzz():
    rnd = random.Random(5)
    for _ in range(500):
        n = rnd.randint(4, 12)
        k = rnd.randint(1, min(4, n // 2))
        r = rnd.randint(0, 4)
        edges = [rnd.sample(range(1, n + 1), k) for _ in range(r)]
        edges = [list(e) for e in {frozenset(e) for e in edges}]
        verts = list(range(1, n + 1))
        rnd.shuffle(verts)
        fin = verts[: rnd.randint(0, min(2, k))]
        fout = verts[len(fin): len(fin) + rnd.randint(0, 2)]
        H = Hypergraph(n, k, edges)
        assert count_open(H, fin, fout) == brute_open(n, k, edges, fin, fout)


def test_count_open_monotone():
    rnd = random.Random(1)
    n, k = 12, 3
    H = Hypergraph(n, k)
    prev = count_open(H)
    for _ in range(6):
        e = rnd.sample(range(1, n + 1), k)
        if frozenset(e) in {frozenset(x) for x in H.edges}:
            continue
        H.append(e)
        cur = count_open(H)
        assert cur <= prev
        prev = cur


def test_count_open_errors():
    H = Hypergraph(8, 3, [[1, 2, 3]])
    with pytest.raises(InfeasibleQuery):
        count_open(H, forced_in={1, 2, 4, 5})
    with pytest.raises(InfeasibleQuery):
        count_open(H, forced_in={1}, forced_out={1})
    big = Hypergraph(200, 2, [[1, i] for i in range(2, 29)])
    with pytest.raises(TooManyEdges):
        count_open(big)


def test_nu_bounds():
    n, k = 1000, 10
    # three edges pairwise meeting at distinct vertices
    e1 = [1, 2] + list(range(10, 18))
    e2 = [1, 3] + list(range(20, 28))
    e3 = [2, 3] + list(range(30, 38))
    H = Hypergraph(n, k, [e1, e2, e3])
    lo, hi = nu_bounds(H, {1})
    assert 0 < lo <= hi
    # S covering every edge: exponent zero
    lo, hi = nu_bounds(Hypergraph(n, k, [e1, e2]), {1})
    assert lo == binom(n - 2 * k, k - 1) and hi == binom(n, k - 1)
    lo, hi = nu_bounds(Hypergraph(n, k, [e1, e2]), set())
    assert hi == k ** 2 * binom(n, k - 2)
    with pytest.raises(SNotDegreeTwoPlus):
        nu_bounds(H, {10})


def _is_almost_simple(H, E):
    deg = H.index.degree
    for e in H.masks:
        common = E & e
        vs = [v for v in range(1, H.n + 1) if common >> (v - 1) & 1]
        if len(vs) >= 2 and any(deg[v] < 2 for v in vs):
            return False
    return True


def test_nu_bounds_sandwich_exact_nu_tiny():
    # exact nu(S) by enumeration on a tiny instance
    n, k = 40, 3
    H = Hypergraph(n, k, [[1, 2, 3], [1, 4, 5], [2, 4, 6]])
    W = H.index.W
    for S in [{1}, {2}, {1, 4}]:
        sm = sum(1 << (v - 1) for v in S)
        cnt = 0
        for E in itertools.combinations(range(1, n + 1), k):
            m = sum(1 << (v - 1) for v in E)
            if not all(m & e for e in H.masks) or m in H:
                continue
            trace = {v for v in E if v in W}
            if trace != S or not _is_almost_simple(H, m):
                continue
            cnt += 1
        lo, hi = nu_bounds(H, S)
        assert lo <= cnt <= hi


def test_nu_asymptotic():
    p = ProcessParams(8000, 20)
    assert nu_asymptotic(p, 0, 0, 0) == 1
    assert math.isclose(nu_asymptotic(p, 1, 2, 2), 1 / 20 ** 2)
    e1 = [1] + list(range(2, 21))
    e2 = [1] + list(range(21, 40))
    H = Hypergraph(8000, 20, [e1, e2])
    exact = count_open(H, forced_in={1}) / binom(8000, 20)
    assert abs(nu_asymptotic(p, 1, 2, 2) / exact - 1) <= 0.15


def test_indep_deg2_count_values():
    assert indep_deg2_count(4, 2) == 3
    assert indep_deg2_count(5, 0) == 1
    for r in range(2, 10):
        assert indep_deg2_count(r, 1) == binom(r, 2)
    with pytest.raises(MOutOfRange):
        indep_deg2_count(3, 2)


def test_family_size_asymptotic():
    p = ProcessParams(1000, 10)
    assert math.isclose(family_size_asymptotic(p, 3, [{7}]), 1 / 100)
    c = p.c
    assert math.isclose(family_size_asymptotic(p, 4, [{7}]), c ** 6 / 1000)
    with pytest.raises(EmptyStableFamily):
        family_size_asymptotic(p, 3, [])


def test_params():
    assert math.isclose(ProcessParams(1000, 10).c, 1.0)
    with pytest.raises(ValueError):
        ProcessParams(10, 6)
