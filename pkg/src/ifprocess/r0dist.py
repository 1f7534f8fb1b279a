"""Law of the first time a vertex reaches degree three.

With ``a_r = sum_{m>=1} r! / ((r-2m)! m! (2c^3)^m)`` the hazard of the event
at step ``r + 1`` is ``h_r = a_r / (1 + a_r)``. The sequence ``a_r`` has
exponential generating function ``e^x (e^{x^2/(2c^3)} - 1)``.
"""
from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

from scipy import stats

from .errors import NoResolvedTraces

__all__ = [
    "HazardTable",
    "hazard_ratio",
    "r0_pmf",
    "egf_coeffs",
    "empirical_r0",
    "write_table_csv",
    "wilson_interval",
    "exact_p_r0_3",
]

R_MAX = 200


def _exact(c):
    """c as a Fraction when it is rational (ints, Fractions), else None."""
    if isinstance(c, Rational):
        return Fraction(c)
    return None


def hazard_ratio(r: int, c):
    """a_r; a Fraction when ``c`` is rational, else a float."""
    if r < 0:
        raise ValueError("r must be nonnegative")
    if c <= 0:
        raise ValueError("c must be positive")
    cf = _exact(c)
    if cf is not None:
        q = 2 * cf ** 3
        total = Fraction(0)
        for m in range(1, r // 2 + 1):
            total += Fraction(math.factorial(r) // (math.factorial(r - 2 * m) * math.factorial(m))) / q ** m
        return total
    # log-space terms, summed with fsum
    lq = math.log(2 * float(c) ** 3)
    lr = math.lgamma(r + 1)
    terms = [math.exp(lr - math.lgamma(r - 2 * m + 1) - math.lgamma(m + 1) - m * lq)
             for m in range(1, r // 2 + 1)]
    return math.fsum(terms)


@dataclass
class HazardTable:
    c: object
    a: list
    h: list
    pmf: dict  # r0 value -> probability
    tail: object  # P(r0 > r_max + 1)

    def p(self, r0: int):
        return self.pmf.get(r0, 0)


def r0_pmf(c, r_max: int = 60) -> HazardTable:
    """Hazards and pmf of r0 for r = 0..r_max (so r0 up to r_max + 1)."""
    if r_max > R_MAX:
        raise ValueError(f"r_max must be <= {R_MAX}")
    exact = _exact(c) is not None
    one = Fraction(1) if exact else 1.0
    a = [hazard_ratio(r, c) for r in range(r_max + 1)]
    h = [x / (one + x) for x in a]
    pmf = {}
    surv = one
    for r, hr in enumerate(h):
        pmf[r + 1] = surv * hr
        surv = surv * (one - hr)
    return HazardTable(c, a, h, pmf, surv)


def _exp_series(coeffs, r_max, one):
    """Coefficients of exp(f) for a power series f with f(0) = 0.

    Uses g' = f' g, i.e. n g_n = sum_{j=1}^{n} j f_j g_{n-j}.
    """
    g = [one] + [one * 0] * r_max
    for n in range(1, r_max + 1):
        s = one * 0
        for j in range(1, n + 1):
            if coeffs[j]:
                s += j * coeffs[j] * g[n - j]
        g[n] = s / n
    return g


def egf_coeffs(c, r_max: int = 20) -> list:
    """Taylor coefficients t_r of e^x (e^{x^2/(2c^3)} - 1), r = 0..r_max."""
    if r_max > R_MAX:
        raise ValueError(f"r_max must be <= {R_MAX}")
    cf = _exact(c)
    one = Fraction(1) if cf is not None else 1.0
    q = 2 * (cf if cf is not None else float(c)) ** 3
    f = [one * 0] * (r_max + 1)
    if r_max >= 2:
        f[2] = one / q
    inner = _exp_series(f, r_max, one)
    inner[0] -= one
    ex = [one / math.factorial(i) for i in range(r_max + 1)]
    return [sum((ex[i] * inner[r - i] for i in range(r + 1)), one * 0) for r in range(r_max + 1)]


def exact_p_r0_3(n: int, k: int) -> Fraction:
    """Exact P(r0 = 3) for the finite process on k-subsets of [n].

    Conditions on s = |E1 ∩ E2|; the third edge creates a degree-3 vertex
    exactly when it meets E1 ∩ E2.
    """
    from .counting import count_open_masks
    from .setcore import binom, mask_of

    second = binom(n, k) - binom(n - k, k) - 1
    total = Fraction(0)
    for s in range(1, k):
        p_s = Fraction(binom(k, s) * binom(n - k, k - s), second)
        e1 = mask_of(range(1, k + 1))
        e2 = mask_of(list(range(1, s + 1)) + list(range(k + 1, 2 * k - s + 1)))
        open_ = count_open_masks([e1, e2], n, k) - 2
        hit = binom(n, k) - binom(n - s, k) - 2
        total += p_s * Fraction(hit, open_)
    return total


def wilson_interval(successes: int, trials: int, z: float = 1.96):
    if trials == 0:
        return (0.0, 1.0)
    p = successes / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return (max(0.0, centre - half), min(1.0, centre + half))


def empirical_r0(traces, table: HazardTable) -> dict:
    """Histogram of r0 and a chi-square comparison with the model.

    ``traces`` may hold ints (r0 values, ``None`` for unresolved) or anything
    accepted by :func:`structure.hitting_times`. Model probabilities are
    restricted to the observed support and renormalised.
    """
    from .structure import hitting_times

    values = []
    for t in traces:
        r0 = t if t is None or isinstance(t, int) else hitting_times(t).r0
        if r0 is not None:
            values.append(int(r0))
    if not values:
        raise NoResolvedTraces("no trace has a resolved r0")
    hist = Counter(values)
    total = len(values)
    support = sorted(hist)
    expected_p = [float(table.p(r)) for r in support]
    norm = sum(expected_p)
    report = {
        "n_resolved": total,
        "histogram": {r: hist[r] for r in support},
        "p_hat": {r: hist[r] / total for r in support},
        "ci": {r: wilson_interval(hist[r], total) for r in support},
        "model": {r: float(table.p(r)) for r in support},
    }
    if len(support) > 1 and norm > 0:
        exp_counts = [total * p / norm for p in expected_p]
        res = stats.chisquare([hist[r] for r in support], exp_counts)
        report["chi2"] = float(res.statistic)
        report["p_value"] = float(res.pvalue)
        report["dof"] = len(support) - 1
    return report


def write_table_csv(table: HazardTable, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "a_r", "h_r", "pmf_r"])
        for r in range(len(table.a)):
            w.writerow([r, float(table.a[r]), float(table.h[r]), float(table.pmf[r + 1])])
