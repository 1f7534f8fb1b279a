import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ifprocess.errors import DuplicateVertex, MismatchedGroundSet, OutOfRange
from ifprocess.setcore import (
    BigCount, DegreeIndex, Hypergraph, KSet, all_kset_masks, binom, degree_index,
    intersects, log_binom, make_kset,
)


def test_make_kset_sorts():
    assert make_kset([3, 1, 2], 5).vertices == (1, 2, 3)


def test_make_kset_errors():
    with pytest.raises(DuplicateVertex):
        make_kset([1, 1, 2], 5)
    with pytest.raises(OutOfRange):
        make_kset([0, 2], 5)


def test_kset_text_roundtrip():
    e = make_kset([4, 2, 7], 9)
    assert str(e) == "2,4,7"
    assert KSet.parse(str(e), 9) == e


def test_intersects():
    assert intersects(make_kset([1, 2], 5), make_kset([2, 3], 5))
    assert not intersects(make_kset([1, 2], 5), make_kset([3, 4], 5))
    a = make_kset([1, 5], 5)
    assert intersects(a, a)
    with pytest.raises(MismatchedGroundSet):
        intersects(make_kset([1], 5), make_kset([1], 6))


def _pascal(nmax):
    rows = [[1]]
    for n in range(1, nmax + 1):
        prev = rows[-1]
        rows.append([1] + [prev[i - 1] + prev[i] for i in range(1, n)] + [1])
    return rows


def test_binom_values_and_pascal():
    assert binom(5, 2) == 10 and binom(16, 6) == 8008 and binom(10, 6) == 210
    assert binom(3, 5) == 0
    rows = _pascal(60)
    for n in range(61):
        for k in range(n + 1):
            assert binom(n, k) == rows[n][k]


def test_binom_log_view():
    for n, k in [(100, 7), (10**4, 300), (10**4, 5000)]:
        b = binom(n, k)
        assert isinstance(b, BigCount)
        assert math.isclose(b.log, log_binom(n, k), rel_tol=1e-12)


def test_degree_index_example():
    H = Hypergraph(8, 3, [[1, 2, 3], [1, 4, 5]])
    idx = degree_index(H)
    assert idx.degree[1] == 2 and idx.W == {1} and idx.U == {2, 3, 4, 5}
    assert idx == H.index
    assert degree_index(Hypergraph(8, 3)).maxdeg == 0


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sets(st.integers(1, 12), min_size=4, max_size=4), max_size=8))
def test_incremental_index_matches_recompute(edges):
    H = Hypergraph(12, 4)
    seen = set()
    for e in edges:
        key = frozenset(e)
        if key in seen:
            continue
        seen.add(key)
        H.append(sorted(e))
        assert H.index == degree_index(H)
    idx = H.index
    assert idx.V == idx.U | idx.W and not idx.U & idx.W
    assert sum(idx.degree.values()) == H.r * H.k


def test_hypergraph_rejects_duplicates_and_text_roundtrip():
    H = Hypergraph(8, 3, [[1, 2, 3], [1, 4, 5]])
    with pytest.raises(DuplicateVertex):
        H.append([1, 2, 3])
    assert Hypergraph.from_text(H.to_text(), 8, 3).masks == H.masks


def test_all_kset_masks():
    m = all_kset_masks(7, 3)
    assert len(m) == 35 and len(set(m.tolist())) == 35
    assert all(int(x).bit_count() == 3 for x in m)
    expected = {sum(1 << (v - 1) for v in c) for c in itertools.combinations(range(1, 8), 3)}
    assert set(int(x) for x in m) == expected
    assert m.dtype == np.uint64
