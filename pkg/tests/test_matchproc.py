from collections import Counter
from fractions import Fraction

import pytest

from ifprocess.errors import EmptyList, NotMaximal, TCapExceeded, TooLarge
from ifprocess.matchproc import (
    OTHER, STAR, TWO_OF_THREE, classify_matching_family, enumerate_matchings,
    exact_stop_distribution, is_maximal_intersecting, run_conditioned, run_matching_procedure,
    weighted_sample,
)
from ifprocess.rng import make_rng, trial_rng


def test_enumeration_counts():
    assert len(enumerate_matchings(2)) == 2
    assert len(enumerate_matchings(4)) == 10
    assert [len(enumerate_matchings(t)) for t in range(1, 8)] == [1, 2, 4, 10, 26, 76, 232]
    got = set(enumerate_matchings(4, constraint=[frozenset({(1, 2)})]))
    assert got == {frozenset({(1, 2)}), frozenset({(1, 2), (3, 4)})}
    with pytest.raises(TooLarge):
        enumerate_matchings(11)


def test_weighted_sample_frequencies():
    ms = enumerate_matchings(2)
    rng = make_rng(3)
    runs = 20000
    half = sum(len(weighted_sample(ms, 1, rng)) == 1 for _ in range(runs)) / runs
    assert abs(half - 0.5) < 0.015
    eight = sum(len(weighted_sample(ms, 8, rng)) == 1 for _ in range(runs)) / runs
    assert abs(eight - 8 / 9) < 0.01
    floaty = sum(len(weighted_sample(ms, 8.0, rng)) == 1 for _ in range(runs)) / runs
    assert abs(floaty - 8 / 9) < 0.01
    with pytest.raises(EmptyList):
        weighted_sample([], 1, rng)
    with pytest.raises(ValueError):
        weighted_sample(ms, 0, rng)


def test_exact_stop_law():
    for w in (Fraction(1), Fraction(1, 3), Fraction(5, 2)):
        d = exact_stop_distribution(w)
        assert d["stop"][1] == 0
        assert d["stop"][2] == w / (1 + w)
        assert sum(d["stop"].values()) + d["overflow"] == 1
        for t in range(2, 6):
            assert d["types"][t] == {STAR: 1}
        assert sum(d["types"][6].values()) == 1
    with pytest.raises(TooLarge):
        exact_stop_distribution(1, t_max=7)
    with pytest.raises(TypeError):
        exact_stop_distribution(1.0)


def test_exact_t6_at_unit_weight():
    d = exact_stop_distribution(1)
    assert d["types"][6] == {STAR: Fraction(507, 512), TWO_OF_THREE: Fraction(5, 512)}


def test_classification_examples():
    t = 4
    star = [m for m in enumerate_matchings(t) if (1, 2) in m]
    assert classify_matching_family(star, t) == (STAR, ((1, 2),))
    t = 6
    e = [(1, 2), (3, 4), (5, 6)]
    tot = [m for m in enumerate_matchings(t) if sum(x in m for x in e) >= 2]
    tag, wit = classify_matching_family(tot, t)
    assert tag == TWO_OF_THREE and sorted(wit) == e
    with pytest.raises(NotMaximal):
        classify_matching_family(star[:1], 4)
    with pytest.raises(NotMaximal):
        classify_matching_family([frozenset({(1, 2)}), frozenset({(3, 4)})], 4)
    assert not is_maximal_intersecting([], 4)


def test_procedure_outputs_maximal_families():
    rng = make_rng(9)
    for _ in range(200):
        t, fam = run_matching_procedure(1, rng)
        assert is_maximal_intersecting(fam, t)
        assert classify_matching_family(fam, t)[0] in (STAR, TWO_OF_THREE, OTHER)
    with pytest.raises(TCapExceeded):
        run_matching_procedure(Fraction(1, 10**6), make_rng(0), t_cap=3)
    with pytest.raises(ValueError):
        run_conditioned(1, 1, rng)


def test_monte_carlo_matches_exact_t6():
    runs = 20000
    tags = Counter(classify_matching_family(run_conditioned(6, 1, trial_rng(17, i)), 6)[0]
                   for i in range(runs))
    p = 507 / 512
    se = (p * (1 - p) / runs) ** 0.5
    assert abs(tags[STAR] / runs - p) <= 4 * se
    assert tags[STAR] + tags[TWO_OF_THREE] == runs



def test_stop_time_chi_square():
    from scipy import stats

    runs = 10**5
    rng = make_rng(21)
    counts = Counter(min(run_matching_procedure(1, rng)[0], 6) for _ in range(runs))
    d = exact_stop_distribution(1)
    probs = [d["stop"][t] for t in (2, 3, 4, 5)]
    probs.append(1 - sum(probs))
    obs = [counts[t] for t in (2, 3, 4, 5, 6)]
    assert stats.chisquare(obs, [float(p) * runs for p in probs]).pvalue >= 1e-3
