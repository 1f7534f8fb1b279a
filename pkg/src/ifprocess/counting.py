"""Exact and asymptotic counts of open edges and extension profiles."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    EmptyStableFamily,
    InfeasibleQuery,
    MOutOfRange,
    SNotDegreeTwoPlus,
    TooManyEdges,
)
from .setcore import BigCount, Hypergraph, binom, mask_of

__all__ = [
    "MAX_IE_EDGES",
    "ProcessParams",
    "OpenCountQuery",
    "count_open",
    "count_open_masks",
    "nu_bounds",
    "nu_asymptotic",
    "indep_deg2_count",
    "family_size_asymptotic",
]

MAX_IE_EDGES = 25


@dataclass(frozen=True)
class ProcessParams:
    n: int
    k: int

    def __post_init__(self):
        if not (1 <= self.k and 2 * self.k <= self.n):
            raise ValueError(f"need 1 <= k <= n/2, got n={self.n}, k={self.k}")

    @property
    def c(self) -> float:
        return self.k / self.n ** (1 / 3)

    @classmethod
    def from_c(cls, n: int, c: float) -> "ProcessParams":
        return cls(n, max(1, round(c * n ** (1 / 3))))


@dataclass(frozen=True)
class OpenCountQuery:
    H: Hypergraph
    forced_in: frozenset = frozenset()
    forced_out: frozenset = frozenset()


def _reduce_edges(edges):
    """Drop duplicates and any edge containing another (meeting the smaller implies meeting it)."""
    uniq = sorted(set(edges), key=lambda m: m.bit_count())
    kept = []
    for e in uniq:
        if not any(s & e == s for s in kept):
            kept.append(e)
    return kept


def count_open_masks(edge_masks, n: int, k: int, in_mask: int = 0, out_mask: int = 0) -> int:
    """Number of k-subsets E of [n] with in_mask ⊆ E, E ∩ out_mask = ∅ and
    E meeting every edge mask. Inclusion–exclusion over the edges that
    ``in_mask`` does not already hit."""
    if in_mask & out_mask:
        return 0
    n_in = in_mask.bit_count()
    if n_in > k:
        raise InfeasibleQuery(f"{n_in} forced vertices exceed k={k}")
    kk = k - n_in
    live = []
    for e in edge_masks:
        if e & in_mask:
            continue
        e &= ~out_mask
        if not e:
            return 0
        live.append(e)
    live = _reduce_edges(live)
    if len(live) > MAX_IE_EDGES:
        raise TooManyEdges(f"{len(live)} constraining edges exceed {MAX_IE_EDGES}")
    free = n - n_in - out_mask.bit_count()
    # signed coefficient per union mask, merged as we go
    terms = {0: 1}
    for e in live:
        nxt = dict(terms)
        for u, c in terms.items():
            v = u | e
            nxt[v] = nxt.get(v, 0) - c
        terms = {u: c for u, c in nxt.items() if c}
    by_size: dict[int, int] = {}
    for u, c in terms.items():
        s = u.bit_count()
        by_size[s] = by_size.get(s, 0) + c
    return sum(c * binom(free - s, kk) for s, c in by_size.items() if c)


def count_open(q: OpenCountQuery | Hypergraph, forced_in=(), forced_out=()) -> BigCount:
    """Exact count of open k-sets for a query (or a hypergraph plus forcings)."""
    if isinstance(q, OpenCountQuery):
        H, forced_in, forced_out = q.H, q.forced_in, q.forced_out
    else:
        H = q
    if H.r > MAX_IE_EDGES:
        raise TooManyEdges(f"{H.r} edges exceed the inclusion-exclusion cap {MAX_IE_EDGES}")
    fi, fo = set(forced_in), set(forced_out)
    if fi & fo:
        raise InfeasibleQuery("forced_in and forced_out overlap")
    if len(fi) > H.k:
        raise InfeasibleQuery(f"{len(fi)} forced vertices exceed k={H.k}")
    return BigCount(count_open_masks(H.masks, H.n, H.k, mask_of(fi), mask_of(fo)))


def nu_bounds(H: Hypergraph, S) -> tuple[BigCount, BigCount]:
    """Lower and upper bounds on the number of almost simple extensions with
    degree-≥2 trace containing ``S`` and meeting the remaining edges at
    degree-one vertices."""
    S = set(S)
    W = H.index.W
    if not S <= W:
        raise SNotDegreeTwoPlus(f"vertices {sorted(S - W)} have degree < 2")
    n, k, r = H.n, H.k, H.r
    sm = mask_of(S)
    e_S = sum(1 for m in H.masks if m & sm)
    free = r - e_S
    low_base = max(k - r * r, 0)
    lower = low_base ** free * binom(n - k * r, k - free - len(S))
    upper = k ** free * binom(n, k - free - len(S))
    return BigCount(lower), BigCount(upper)


def nu_asymptotic(params: ProcessParams, s: int, e_S: int, r: int) -> float:
    """Asymptotic ν(S)/C(n,k) = c^{3(r-e+s)} / k^{r-e+2s}."""
    c, k = params.c, params.k
    a = r - e_S + s
    b = r - e_S + 2 * s
    return math.exp(3 * a * math.log(c) - b * math.log(k))


def indep_deg2_count(r: int, m: int) -> BigCount:
    """r! / ((r-2m)! m! 2^m): independent degree-two sets of size m."""
    if m < 0 or 2 * m > r:
        raise MOutOfRange(f"need 0 <= m <= r/2, got r={r}, m={m}")
    return BigCount(math.factorial(r) // (math.factorial(r - 2 * m) * math.factorial(m) * 2 ** m))


def family_size_asymptotic(params: ProcessParams, r0: int, S_family) -> float:
    """Asymptotic |I_k|/C(n,k) = Σ_S c^{3(r0-1-|S|)} / k^{r0-1}."""
    fam = [frozenset(S) for S in S_family]
    if not fam:
        raise EmptyStableFamily("stable family is empty")
    for S in fam:
        if 2 * len(S) > r0 - 1:
            raise ValueError(f"set of size {len(S)} too large for r0={r0}")
    logc, logk = math.log(params.c), math.log(params.k)
    return math.fsum(math.exp(3 * (r0 - 1 - len(S)) * logc - (r0 - 1) * logk) for S in fam)
