"""Running the random greedy intersecting process.

Two engines are provided. The early-steps engine samples the next edge exactly
uniformly among open unchosen k-sets by unranking against inclusion–exclusion
counts, so it works for large n as long as only a few dozen edges are placed.
The full engine keeps every open k-set in a numpy array and runs the process to
maximality; it is only usable when binom(n, k) is small.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .counting import MAX_IE_EDGES, ProcessParams, count_open_masks
from .errors import InstanceTooLarge, NoOpenEdge, TooManyEdges, TooManyHighDegreeVertices
from .rng import randbelow
from .setcore import Hypergraph, KSet, all_kset_masks, binom, vertices_of
from .structure import GOOD, extension_quality

__all__ = [
    "ProcessTrace",
    "FinalFamily",
    "Exhausted",
    "sample_open_edge_exact",
    "sample_open_edge_rejection",
    "run_process_early",
    "run_process_full",
    "oracle_step_distribution",
]

FULL_LIMIT = 10**7
ORACLE_LIMIT = 10**6


class _ExhaustedType:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "Exhausted"

    def __bool__(self):
        return False


Exhausted = _ExhaustedType()


@dataclass
class ProcessTrace:
    """One run of the process.

    ``quality[i]`` labels edge ``i + 1`` as an extension of the first ``i``
    edges; ``None`` marks steps that were not labelled (the full engine labels
    only a prefix, since labelling needs a subset search over high-degree
    vertices).
    """

    params: ProcessParams
    edges: list = field(default_factory=list)
    quality: list = field(default_factory=list)
    seed: int | None = None
    mode: str = "Full"

    @property
    def n(self):
        return self.params.n

    @property
    def k(self):
        return self.params.k

    def __len__(self):
        return len(self.edges)

    def to_text(self) -> str:
        lines = [f"# n={self.n} k={self.k} seed={self.seed} mode={self.mode}"]
        for e, q in zip(self.edges, self.quality):
            lines.append(f"{e} {q if q is not None else '-'}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ProcessTrace":
        lines = text.splitlines()
        head = dict(tok.split("=", 1) for tok in lines[0].lstrip("# ").split())
        params = ProcessParams(int(head["n"]), int(head["k"]))
        seed = None if head["seed"] == "None" else int(head["seed"])
        tr = cls(params, seed=seed, mode=head["mode"])
        for line in lines[1:]:
            if not line.strip():
                continue
            e, q = line.split()
            tr.edges.append(KSet.parse(e, params.n))
            tr.quality.append(None if q == "-" else q)
        return tr


@dataclass
class FinalFamily:
    members: set
    maximal: bool

    def __len__(self):
        return len(self.members)


def _check_params(H, params):
    if params is not None and (H.n, H.k) != (params.n, params.k):
        raise ValueError("hypergraph and params disagree on (n, k)")


def sample_open_edge_exact(H: Hypergraph, params: ProcessParams | None, rng) -> KSet:
    """Uniform open k-set not already in ``H``.

    Draws one uniform rank below the number of open k-sets and walks the
    vertices of V(H) in ascending order, keeping a vertex exactly when the rank
    falls among the open sets that contain it (given the decisions so far).
    The untouched vertices are then filled in uniformly. A draw that lands on
    an already chosen edge is repeated.
    """
    _check_params(H, params)
    n, k = H.n, H.k
    if H.r > MAX_IE_EDGES:
        raise TooManyEdges(f"{H.r} edges exceed the exact-sampling cap {MAX_IE_EDGES}")
    total = count_open_masks(H.masks, n, k)
    if total <= H.r:
        raise NoOpenEdge(f"no unchosen open edge after {H.r} steps")
    touched = sorted(H.index.V)
    touched_mask = 0
    for v in touched:
        touched_mask |= 1 << (v - 1)
    others = np.array([v for v in range(1, n + 1) if not touched_mask >> (v - 1) & 1])
    while True:
        x = randbelow(rng, total)
        fin = fout = 0
        for v in touched:
            if fin.bit_count() == k:
                break
            bit = 1 << (v - 1)
            with_v = count_open_masks(H.masks, n, k, fin | bit, fout)
            if x < with_v:
                fin |= bit
            else:
                x -= with_v
                fout |= bit
        rest = k - fin.bit_count()
        mask = fin
        if rest:
            for v in rng.choice(others, size=rest, replace=False):
                mask |= 1 << (int(v) - 1)
        if mask not in H:
            return KSet.from_mask(mask, n)


def sample_open_edge_rejection(H: Hypergraph, params: ProcessParams | None, rng,
                               max_tries: int = 10**4):
    """Uniform k-sets filtered on meeting every edge and being unchosen."""
    _check_params(H, params)
    verts = np.arange(1, H.n + 1)
    for _ in range(max_tries):
        vs = rng.choice(verts, size=H.k, replace=False)
        mask = 0
        for v in vs:
            mask |= 1 << (int(v) - 1)
        if mask in H:
            continue
        if all(mask & m for m in H.masks):
            return KSet.from_mask(mask, H.n)
    return Exhausted


def _label(H: Hypergraph, E: KSet):
    try:
        return extension_quality(H, E)
    except TooManyHighDegreeVertices:
        return None


def run_process_early(params: ProcessParams, b: int, rng, stop: str | None = None,
                      label: bool = True, seed: int | None = None) -> ProcessTrace:
    """Run up to ``b`` steps with the exact sampler.

    ``stop="r0"`` ends the run at the first step creating a degree-3 vertex,
    ``stop="r1"`` once the stable family is resolved.
    """
    if b > MAX_IE_EDGES:
        raise TooManyEdges(f"b={b} exceeds {MAX_IE_EDGES}")
    H = Hypergraph(params.n, params.k)
    tr = ProcessTrace(params, seed=seed, mode=f"Early({b})")
    for _ in range(b):
        E = sample_open_edge_exact(H, params, rng)
        tr.quality.append(_label(H, E) if label else None)
        assert all(E.mask & m for m in H.masks)
        H.append(E)
        tr.edges.append(E)
        if stop == "r0" and H.index.maxdeg >= 3:
            break
        if stop == "r1" and H.index.maxdeg >= 3:
            from .structure import hitting_times

            if hitting_times(tr).r1 is not None:
                break
    return tr


def _is_intersecting_masks(arr: np.ndarray, budget: float) -> bool | None:
    """Pairwise-intersecting test; ``None`` if it would cost more than ``budget``."""
    if arr.size <= 1:
        return True
    common = np.bitwise_and.reduce(arr)
    if common:
        return True
    # sets through the most popular vertex meet each other; test the rest
    n = int(np.bitwise_or.reduce(arr)).bit_length()
    counts = [np.count_nonzero(arr & np.uint64(1 << v)) for v in range(n)]
    top = np.uint64(1 << int(np.argmax(counts)))
    rest = arr[(arr & top) == 0]
    if rest.size * arr.size > budget:
        return None
    for a in rest:
        if np.any((arr & a) == 0):
            return False
    return True


def run_process_full(params: ProcessParams, rng, label_steps: int | None = None,
                     seed: int | None = None, check_every: int = 16):
    """Run the process to maximality over an explicit list of open k-sets.

    Once the open sets (chosen or not) are pairwise intersecting the outcome is
    fixed: every remaining open set will be chosen, so they are appended in a
    uniformly random order instead of one draw at a time.

    With ``label_steps=None`` steps are labelled until the first non-Good
    label, so ``all(q == "Good" for q in trace.quality)`` certifies that the
    whole run used good extensions. An integer labels that many leading steps.
    """
    n, k = params.n, params.k
    if binom(n, k) > FULL_LIMIT:
        raise InstanceTooLarge(f"C({n},{k}) = {binom(n, k)} exceeds {FULL_LIMIT}")
    allm = all_kset_masks(n, k)
    open_ = allm.copy()  # open and unchosen
    chosen: list[int] = []
    H = Hypergraph(n, k)
    tr = ProcessTrace(params, seed=seed, mode="Full")

    def wants_label(step):
        if label_steps is None:
            return all(q == GOOD for q in tr.quality)
        return step < label_steps

    def record(m):
        E = KSet.from_mask(m, n)
        step = len(tr.edges)
        if wants_label(step):
            tr.quality.append(_label(H, E))
            H.append(E)
        else:
            tr.quality.append(None)
        tr.edges.append(E)
        chosen.append(m)

    step = 0
    while open_.size:
        if step % check_every == 0 and step >= 3:
            both = np.concatenate([np.array(chosen, dtype=np.uint64), open_])
            if _is_intersecting_masks(both, budget=4e7):
                for m in open_[rng.permutation(open_.size)]:
                    record(int(m))
                break
        i = int(rng.integers(open_.size))
        m = int(open_[i])
        record(m)
        keep = (open_ & np.uint64(m)) != 0
        keep[i] = False
        open_ = open_[keep]
        step += 1
    members = np.array(chosen, dtype=np.uint64)
    final = FinalFamily({KSet.from_mask(int(m), n) for m in members}, _maximal(members, allm))
    assert final.maximal
    return tr, final


def _maximal(members: np.ndarray, allm: np.ndarray) -> bool:
    """No k-set outside ``members`` meets every member (and members intersect)."""
    cand = allm[~np.isin(allm, members)]
    for a in members:
        cand = cand[(cand & a) != 0]
        if not cand.size:
            break
    if cand.size:
        return False
    return bool(_is_intersecting_masks(members, budget=float("inf")))


def oracle_step_distribution(H: Hypergraph, params: ProcessParams | None = None) -> dict:
    """Exact next-step law by enumeration: uniform over open unchosen k-sets."""
    _check_params(H, params)
    n, k = H.n, H.k
    if binom(n, k) > ORACLE_LIMIT:
        raise InstanceTooLarge(f"C({n},{k}) = {binom(n, k)} exceeds {ORACLE_LIMIT}")
    allm = all_kset_masks(n, k, limit=ORACLE_LIMIT)
    ok = np.ones(allm.shape, dtype=bool)
    for m in H.masks:
        ok &= (allm & np.uint64(m)) != 0
    ok &= ~np.isin(allm, np.array(H.masks, dtype=np.uint64))
    support = [int(m) for m in allm[ok]]
    if not support:
        return {}
    p = Fraction(1, len(support))
    return {KSet(vertices_of(m), n, m): p for m in support}
