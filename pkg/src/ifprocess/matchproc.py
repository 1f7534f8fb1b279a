"""Random matching procedure on complete graphs.

Matchings of K_t are frozensets of pairs ``(i, j)`` with ``1 <= i < j <= t``.
Two matchings *intersect* when they share an edge. Internally a matching is an
integer bitmask over the edges of K_t, so intersection is a single AND.

The procedure grows t while the weighted draw returns the empty matching, then
keeps drawing matchings that meet every matching drawn so far until the drawn
family is a maximal intersecting family. Draws are weighted by ``w**len(M)``.
"""
from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

import numpy as np

from .errors import EmptyList, NotMaximal, TCapExceeded, TooLarge
from .rng import randbelow

__all__ = [
    "STAR",
    "TWO_OF_THREE",
    "OTHER",
    "enumerate_matchings",
    "weighted_sample",
    "run_matching_procedure",
    "run_conditioned",
    "classify_matching_family",
    "exact_stop_distribution",
    "is_maximal_intersecting",
]

MAX_T = 10

STAR = "Star"
TWO_OF_THREE = "TwoOfThreePM"
OTHER = "Other"


@lru_cache(maxsize=None)
def _edge_list(t):
    return tuple(itertools.combinations(range(1, t + 1), 2))


@lru_cache(maxsize=None)
def _edge_bit(t):
    return {e: 1 << i for i, e in enumerate(_edge_list(t))}


def _to_mask(matching, t):
    bits = _edge_bit(t)
    mask = 0
    for i, j in matching:
        if i > j:
            i, j = j, i
        mask |= bits[(i, j)]
    return mask


def _from_mask(mask, t):
    edges = _edge_list(t)
    return frozenset(edges[i] for i in range(len(edges)) if mask >> i & 1)


@lru_cache(maxsize=None)
def _all_masks(t):
    """All matchings of K_t as edge bitmasks (the empty matching first)."""
    if t > MAX_T:
        raise TooLarge(f"t={t} exceeds {MAX_T}")
    bits = _edge_bit(t)
    out = []

    def rec(free, mask):
        if not free:
            out.append(mask)
            return
        first, rest = free[0], free[1:]
        # first vertex left unmatched
        rec(rest, mask)
        for idx, other in enumerate(rest):
            rec(rest[:idx] + rest[idx + 1:], mask | bits[(first, other)])

    rec(tuple(range(1, t + 1)), 0)
    out.sort(key=lambda m: (m.bit_count(), m))
    return tuple(out)


def enumerate_matchings(t, constraint=None):
    """All matchings of K_t meeting every matching in ``constraint``.

    Without a constraint the empty matching is included.
    """
    masks = _all_masks(t)
    if constraint:
        cons = [_to_mask(m, t) for m in constraint]
        masks = [m for m in masks if all(m & c for c in cons)]
    return [_from_mask(m, t) for m in masks]


def _weights(sizes, w):
    """Integer weights proportional to ``w**size`` when w is rational, else floats."""
    if isinstance(w, Rational):
        w = Fraction(w)
        top = max(sizes)
        return [w.numerator ** s * w.denominator ** (top - s) for s in sizes], True
    return [float(w) ** s for s in sizes], False


def _draw_index(sizes, w, rng):
    weights, exact = _weights(sizes, w)
    if exact:
        x = randbelow(rng, sum(weights))
        for i, wt in enumerate(weights):
            if x < wt:
                return i
            x -= wt
        raise AssertionError("unreachable")
    cum = np.cumsum(weights)
    return int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))


def weighted_sample(matchings, w, rng):
    """Draw M from ``matchings`` with probability proportional to ``w**len(M)``."""
    matchings = list(matchings)
    if not matchings:
        raise EmptyList("cannot sample from an empty list of matchings")
    if w <= 0:
        raise ValueError("weight must be positive")
    return matchings[_draw_index([len(m) for m in matchings], w, rng)]


class _Sampler:
    """Cached weighted draws over a fixed list of masks (used in the hot loops)."""

    def __init__(self, masks, w):
        self.masks = masks
        sizes = [m.bit_count() for m in masks]
        self.weights, self.exact = _weights(sizes, w)
        if self.exact:
            self.cum = list(itertools.accumulate(self.weights))
        else:
            self.cum = np.cumsum(self.weights)

    def draw(self, rng):
        if self.exact:
            x = randbelow(rng, self.cum[-1])
            # bisect on the cumulative integer weights
            lo, hi = 0, len(self.cum) - 1
            while lo < hi:
                mid = (lo + hi) // 2
                if self.cum[mid] > x:
                    hi = mid
                else:
                    lo = mid + 1
            return self.masks[lo]
        i = int(np.searchsorted(self.cum, rng.random() * self.cum[-1], side="right"))
        return self.masks[min(i, len(self.masks) - 1)]


def _grow_family(t, seed_mask, w, rng):
    members = {seed_mask}
    pool = [m for m in _all_masks(t) if m & seed_mask]
    sampler = _Sampler(pool, w)
    # the family is maximal exactly when every admissible matching has been drawn
    while len(members) < len(pool):
        m = sampler.draw(rng)
        if m in members:
            continue
        members.add(m)
        pool = [x for x in pool if x & m]
        sampler = _Sampler(pool, w)
    return members


def run_matching_procedure(w, rng, t_cap=MAX_T):
    """Run the random matching procedure with edge weight ``w``.

    Returns ``(t, family)`` where ``family`` is a frozenset of matchings of K_t
    forming a maximal intersecting family.
    """
    if w <= 0:
        raise ValueError("weight must be positive")
    t = 1
    while True:
        if t > t_cap:
            raise TCapExceeded(f"procedure still growing at t_cap={t_cap}")
        m = _Sampler(_all_masks(t), w).draw(rng)
        if m == 0:
            t += 1
            continue
        members = _grow_family(t, m, w, rng)
        return t, frozenset(_from_mask(x, t) for x in members)


def run_conditioned(t, w, rng):
    """Run the procedure conditioned on it stopping at ``t``.

    By the Markov property this is the second phase started from a seed drawn
    among the nonempty matchings of K_t.
    """
    if t < 2:
        raise ValueError("the procedure cannot stop before t=2")
    nonempty = [m for m in _all_masks(t) if m]
    seed = _Sampler(nonempty, w).draw(rng)
    members = _grow_family(t, seed, w, rng)
    return frozenset(_from_mask(x, t) for x in members)


def is_maximal_intersecting(family, t):
    masks = {_to_mask(m, t) for m in family}
    if not masks or 0 in masks:
        return False
    if any(not (a & b) for a, b in itertools.combinations(masks, 2)):
        return False
    for m in _all_masks(t):
        if m not in masks and all(m & x for x in masks):
            return False
    return True


def _classify_masks(masks, t):
    """Return ``(tag, witness_edges)`` for a maximal intersecting mask family."""
    all_m = _all_masks(t)
    bits = _edge_bit(t)
    common = -1
    for m in masks:
        common &= m
    if common and common.bit_count() == 1:
        star = {m for m in all_m if m & common}
        if star == masks:
            return STAR, (common,)
    if t >= 6:
        used = 0
        for m in masks:
            used |= m
        cand = [e for e, b in bits.items() if used & b]
        for e1, e2, e3 in itertools.combinations(cand, 3):
            if len(set(e1) | set(e2) | set(e3)) != 6:
                continue
            b1, b2, b3 = bits[e1], bits[e2], bits[e3]
            fam = {
                m for m in all_m
                if (bool(m & b1) + bool(m & b2) + bool(m & b3)) >= 2
            }
            if fam == masks:
                return TWO_OF_THREE, (b1, b2, b3)
    return OTHER, ()


def classify_matching_family(family, t):
    """Classify a maximal intersecting family of matchings of K_t.

    Returns ``(tag, edges)``: ``("Star", (e,))`` for all matchings through a
    fixed edge, ``("TwoOfThreePM", (e1, e2, e3))`` for all matchings holding
    at least two of three disjoint edges, or ``("Other", ())``.
    """
    if not is_maximal_intersecting(family, t):
        raise NotMaximal("family is not a maximal intersecting family")
    masks = {_to_mask(m, t) for m in family}
    tag, wit = _classify_masks(masks, t)
    edges = _edge_list(t)
    return tag, tuple(edges[b.bit_length() - 1] for b in wit)


def _is_intersecting(masks):
    ms = list(masks)
    for i in range(len(ms)):
        for j in range(i + 1, len(ms)):
            if not ms[i] & ms[j]:
                return False
    return True


@lru_cache(maxsize=None)
def _vertex_perms(t):
    """Edge-bit permutations induced by every relabelling of [t]."""
    edges = _edge_list(t)
    index = {e: i for i, e in enumerate(edges)}
    perms = []
    for p in itertools.permutations(range(1, t + 1)):
        img = []
        for i, j in edges:
            a, b = p[i - 1], p[j - 1]
            img.append(index[(a, b) if a < b else (b, a)])
        perms.append(tuple(img))
    return tuple(perms)


def _relabel(mask, perm):
    out = 0
    i = 0
    while mask:
        if mask & 1:
            out |= 1 << perm[i]
        mask >>= 1
        i += 1
    return out


def _canonical(pool, t):
    return min(tuple(sorted(_relabel(m, p) for m in pool)) for p in _vertex_perms(t))


def _type_distribution(t, w):
    """Exact distribution of the final family type given a stop at ``t``."""
    w = Fraction(w)
    cache = {}

    def weight(m):
        return w ** m.bit_count()

    def solve(pool):
        # pool = matchings meeting everything drawn so far; the family is
        # settled once the pool itself is intersecting
        if _is_intersecting(pool):
            tag, _ = _classify_masks(set(pool), t)
            return {tag: Fraction(1)}
        key = _canonical(pool, t)
        if key in cache:
            return cache[key]
        moves = []
        for m in pool:
            nxt = tuple(x for x in pool if x & m)
            if len(nxt) < len(pool):
                moves.append((weight(m), nxt))
        total = sum(wt for wt, _ in moves)
        out = {}
        for wt, nxt in moves:
            for tag, p in solve(nxt).items():
                out[tag] = out.get(tag, 0) + wt / total * p
        cache[key] = out
        return out

    seeds = [m for m in _all_masks(t) if m]
    z = sum(weight(m) for m in seeds)
    dist = {}
    for m in seeds:
        pool = tuple(x for x in _all_masks(t) if x & m)
        for tag, p in solve(pool).items():
            dist[tag] = dist.get(tag, 0) + weight(m) / z * p
    return dist


def exact_stop_distribution(w, t_max=6):
    """Exact stop-time and conditional family-type distribution.

    ``w`` must be rational. Returns a dict with ``stop`` (t -> P(stop at t)),
    ``overflow`` (P(t > t_max)) and ``types`` (t -> {tag: P(tag | stop at t)}),
    all as :class:`fractions.Fraction`.
    """
    if t_max > 6:
        raise TooLarge("exact expansion is limited to t_max <= 6")
    if not isinstance(w, Rational):
        raise TypeError("exact distribution needs a rational weight")
    w = Fraction(w)
    if w <= 0:
        raise ValueError("weight must be positive")
    alive = Fraction(1)
    stop, types = {}, {}
    for t in range(1, t_max + 1):
        z = sum(w ** m.bit_count() for m in _all_masks(t))
        p_nonempty = (z - 1) / z
        stop[t] = alive * p_nonempty
        alive *= 1 - p_nonempty
        if t >= 2:
            types[t] = _type_distribution(t, w)
    return {"stop": stop, "overflow": alive, "types": types}
