import math
from fractions import Fraction

import pytest
import sympy as sp

from ifprocess.errors import NoResolvedTraces
from ifprocess.r0dist import (
    egf_coeffs, empirical_r0, exact_p_r0_3, hazard_ratio, r0_pmf, wilson_interval, write_table_csv,
)


def test_hazard_small_values():
    # c = 1: a_2 = 2!/(0! 1! 2) = 1, a_3 = 3, a_0 = a_1 = 0
    assert hazard_ratio(2, 1) == 1
    assert hazard_ratio(3, 1) == 3
    assert hazard_ratio(0, 1) == 0 and hazard_ratio(1, 1) == 0
    assert math.isclose(hazard_ratio(3, 1.0), 3.0)
    with pytest.raises(ValueError):
        hazard_ratio(2, 0)


def test_pmf_values_at_c_one():
    t = r0_pmf(1)
    assert t.p(3) == Fraction(1, 2)
    assert t.p(4) == Fraction(3, 8)
    assert t.p(1) == 0 and t.p(2) == 0


def test_egf_matches_hazard_ratios():
    for c in (Fraction(1), Fraction(1, 2), Fraction(3, 2)):
        coeffs = egf_coeffs(c, 20)
        for r in range(21):
            assert coeffs[r] * math.factorial(r) == hazard_ratio(r, c)


def test_egf_against_symbolic_series():
    x = sp.symbols("x")
    c = sp.Rational(3, 2)
    series = sp.series(sp.exp(x) * (sp.exp(x**2 / (2 * c**3)) - 1), x, 0, 13).removeO()
    coeffs = egf_coeffs(Fraction(3, 2), 12)
    for r in range(13):
        assert Fraction(str(series.coeff(x, r))) == coeffs[r]


def test_hazard_increasing_and_mass():
    t = r0_pmf(1.0, r_max=100)
    assert all(t.h[i] <= t.h[i + 1] for i in range(2, 100))
    assert math.isclose(sum(t.pmf.values()) + t.tail, 1.0, rel_tol=1e-12)
    te = r0_pmf(Fraction(1), r_max=30)
    assert sum(te.pmf.values()) + te.tail == 1
    with pytest.raises(ValueError):
        r0_pmf(1, r_max=500)


def test_exact_finite_n_r0_3():
    # n=5, k=2 by hand: after two edges sharing vertex 1 the open sets are
    # the 2 further edges at 1 plus the one edge joining the two leaves
    assert exact_p_r0_3(5, 2) == Fraction(2, 3)
    assert abs(float(exact_p_r0_3(1000, 10)) - 0.6035) < 1e-3
    # approaches the limit from above as n grows at c = 1
    vals = [float(exact_p_r0_3(k**3, k)) for k in (3, 4, 10, 100)]
    assert all(a > b for a, b in zip(vals, vals[1:])) and vals[-1] > 0.5


def test_empirical_report_and_errors(tmp_path):
    t = r0_pmf(1.0)
    with pytest.raises(NoResolvedTraces):
        empirical_r0([], t)
    with pytest.raises(NoResolvedTraces):
        empirical_r0([None, None], t)
    rep = empirical_r0([3] * 50 + [4] * 38 + [5] * 12 + [None], t)
    assert rep["n_resolved"] == 100
    assert rep["histogram"] == {3: 50, 4: 38, 5: 12}
    assert rep["dof"] == 2 and rep["p_value"] > 0.05
    lo, hi = rep["ci"][3]
    assert lo < 0.5 < hi
    write_table_csv(t, tmp_path / "h.csv")
    lines = (tmp_path / "h.csv").read_text().splitlines()
    assert lines[0] == "r,a_r,h_r,pmf_r" and len(lines) == 62


def test_wilson():
    assert wilson_interval(0, 0) == (0.0, 1.0)
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi and math.isclose(0.5 - lo, hi - 0.5)
