"""k-sets, hypergraphs and degree bookkeeping.

Vertices are 1-based. A :class:`KSet` carries a Python-int bitmask (bit ``v-1``
for vertex ``v``) next to its sorted vertex tuple; both views compare equal.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DuplicateVertex, InstanceTooLarge, MismatchedGroundSet, OutOfRange

__all__ = [
    "KSet",
    "Hypergraph",
    "DegreeIndex",
    "BigCount",
    "make_kset",
    "intersects",
    "binom",
    "log_binom",
    "degree_index",
    "mask_of",
    "vertices_of",
    "popcount",
    "all_kset_masks",
]


def popcount(x: int) -> int:
    return x.bit_count()


def mask_of(vertices) -> int:
    m = 0
    for v in vertices:
        m |= 1 << (v - 1)
    return m


def vertices_of(mask: int) -> tuple[int, ...]:
    out = []
    v = 1
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return tuple(out)


class BigCount(int):
    """Exact nonnegative integer with a natural-log view."""

    @property
    def value(self) -> int:
        return int(self)

    @property
    def log(self) -> float:
        return math.log(self) if self > 0 else -math.inf


@lru_cache(maxsize=1 << 16)
def binom(n: int, k: int) -> BigCount:
    """Exact binomial coefficient; 0 when ``k > n`` or ``k < 0``."""
    if k < 0 or n < 0 or k > n:
        return BigCount(0)
    return BigCount(math.comb(n, k))


def log_binom(n: float, k: float) -> float:
    """log C(n, k) via lgamma; for asymptotic formulas only."""
    if k < 0 or k > n:
        return -math.inf
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


@dataclass(frozen=True, order=True)
class KSet:
    vertices: tuple[int, ...]
    n: int
    mask: int = field(compare=False, repr=False, default=0)

    def __post_init__(self):
        if not self.mask:
            object.__setattr__(self, "mask", mask_of(self.vertices))

    @property
    def k(self) -> int:
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)

    def __len__(self):
        return len(self.vertices)

    def __contains__(self, v):
        return 0 < v <= self.n and bool(self.mask >> (v - 1) & 1)

    def __str__(self):
        return ",".join(map(str, self.vertices))

    @classmethod
    def from_mask(cls, mask: int, n: int) -> "KSet":
        return cls(vertices_of(mask), n, mask)

    @classmethod
    def parse(cls, text: str, n: int) -> "KSet":
        return make_kset([int(x) for x in text.split(",") if x.strip()], n)


def make_kset(vertices, n: int, k: int | None = None) -> KSet:
    """Build a KSet, validating range and distinctness."""
    vs = list(vertices)
    for v in vs:
        if not 1 <= v <= n:
            raise OutOfRange(f"vertex {v} outside [1..{n}]")
    uniq = sorted(set(vs))
    if len(uniq) != len(vs):
        raise DuplicateVertex(f"duplicate vertices in {vs}")
    if k is not None and len(uniq) != k:
        raise OutOfRange(f"expected {k} vertices, got {len(uniq)}")
    return KSet(tuple(uniq), n)


def intersects(a: KSet, b: KSet) -> bool:
    if a.n != b.n:
        raise MismatchedGroundSet(f"ground sets differ: {a.n} vs {b.n}")
    return bool(a.mask & b.mask)


@dataclass
class DegreeIndex:
    degree: Counter = field(default_factory=Counter)
    r: int = 0

    @property
    def V(self) -> frozenset:
        return frozenset(v for v, d in self.degree.items() if d >= 1)

    @property
    def U(self) -> frozenset:
        return frozenset(v for v, d in self.degree.items() if d == 1)

    @property
    def W(self) -> frozenset:
        return frozenset(v for v, d in self.degree.items() if d >= 2)

    @property
    def maxdeg(self) -> int:
        return max(self.degree.values(), default=0)

    def add(self, edge) -> None:
        for v in edge:
            self.degree[v] += 1
        self.r += 1

    def copy(self) -> "DegreeIndex":
        return DegreeIndex(Counter(self.degree), self.r)

    def __eq__(self, other):
        if not isinstance(other, DegreeIndex):
            return NotImplemented
        return +self.degree == +other.degree and self.r == other.r


class Hypergraph:
    """Ordered sequence of distinct k-sets over [n] with a live degree index."""

    def __init__(self, n: int, k: int, edges=(), check_intersecting: bool = False):
        self.n = n
        self.k = k
        self.edges: list[KSet] = []
        self.masks: list[int] = []
        self._members: set[int] = set()
        self.index = DegreeIndex()
        self.check_intersecting = check_intersecting
        for e in edges:
            self.append(e)

    @property
    def r(self) -> int:
        return len(self.edges)

    def append(self, edge) -> None:
        if not isinstance(edge, KSet):
            edge = make_kset(edge, self.n, self.k)
        if edge.n != self.n:
            raise MismatchedGroundSet(f"edge over [{edge.n}] added to hypergraph over [{self.n}]")
        if edge.k != self.k:
            raise OutOfRange(f"edge of size {edge.k} in a {self.k}-uniform hypergraph")
        if edge.mask in self._members:
            raise DuplicateVertex(f"edge {edge} already present")
        if self.check_intersecting and any(not (edge.mask & m) for m in self.masks):
            raise ValueError(f"edge {edge} misses an existing edge")
        self.edges.append(edge)
        self.masks.append(edge.mask)
        self._members.add(edge.mask)
        self.index.add(edge.vertices)

    def prefix(self, r: int) -> "Hypergraph":
        return Hypergraph(self.n, self.k, self.edges[:r])

    def __contains__(self, edge) -> bool:
        mask = edge.mask if isinstance(edge, KSet) else edge
        return mask in self._members

    def __len__(self):
        return len(self.edges)

    def __iter__(self):
        return iter(self.edges)

    def is_intersecting(self) -> bool:
        ms = self.masks
        return all(ms[i] & ms[j] for i in range(len(ms)) for j in range(i + 1, len(ms)))

    def to_text(self) -> str:
        return "".join(f"{e}\n" for e in self.edges)

    @classmethod
    def from_text(cls, text: str, n: int, k: int) -> "Hypergraph":
        return cls(n, k, [KSet.parse(line, n) for line in text.splitlines() if line.strip()])

    def __repr__(self):
        return f"Hypergraph(n={self.n}, k={self.k}, edges=[{'; '.join(map(str, self.edges))}])"


def degree_index(H: Hypergraph) -> DegreeIndex:
    """Degree index recomputed from scratch."""
    idx = DegreeIndex()
    for e in H.edges:
        idx.add(e.vertices)
    return idx


@lru_cache(maxsize=8)
def all_kset_masks(n: int, k: int, limit: int = 10**7) -> np.ndarray:
    """Every k-subset of [n] as a uint64 bitmask, in colex order (n <= 64)."""
    if n > 64:
        raise InstanceTooLarge("bitmask enumeration needs n <= 64")
    if binom(n, k) > limit:
        raise InstanceTooLarge(f"C({n},{k}) = {binom(n, k)} exceeds {limit}")
    # rows[j] holds the j-subsets of the first m vertices
    rows = [np.zeros(1, dtype=np.uint64)] + [np.zeros(0, dtype=np.uint64) for _ in range(k)]
    for m in range(n):
        bit = np.uint64(1) << np.uint64(m)
        for j in range(min(k, m + 1), 0, -1):
            rows[j] = np.concatenate([rows[j], rows[j - 1] | bit])
    out = rows[k]
    out.setflags(write=False)
    return out
