"""Extension quality, hitting times and the sandwich families.

Vertex sets are handled as int bitmasks internally and exposed as frozensets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .counting import ProcessParams, count_open_masks, family_size_asymptotic
from .errors import (
    IncompleteState,
    InfeasibleQuery,
    NotAnExtension,
    SContainsLowDegreeVertex,
    TooManyHighDegreeVertices,
)
from .setcore import (
    DegreeIndex,
    Hypergraph,
    KSet,
    all_kset_masks,
    binom,
    mask_of,
    vertices_of,
)

__all__ = [
    "GOOD",
    "BAD_NOT_ALMOST_SIMPLE",
    "BAD_CHI",
    "TRIVIAL",
    "HILTON_MILNER",
    "JUNTA_OTHER",
    "StructureState",
    "FamilyBounds",
    "FamilyClass",
    "ContainmentReport",
    "chi",
    "chi_star",
    "chi_star_and_Sr",
    "extension_quality",
    "hitting_times",
    "build_bounds",
    "classify",
    "verify_containment",
]

GOOD = "Good"
BAD_NOT_ALMOST_SIMPLE = "BadNotAlmostSimple"
BAD_CHI = "BadChi"

TRIVIAL = "Trivial"
HILTON_MILNER = "HiltonMilner"
JUNTA_OTHER = "JuntaOther"

MAX_W = 40
MAX_J = 30


def _as_hypergraph(H):
    return H if isinstance(H, Hypergraph) else Hypergraph(H.n, H.k, H.edges)


def _incidence(H: Hypergraph, vertices):
    """Bitmask over edge indices containing each vertex."""
    inc = {v: 0 for v in vertices}
    for i, m in enumerate(H.masks):
        for v in vertices:
            if m >> (v - 1) & 1:
                inc[v] |= 1 << i
    return inc


def chi(H: Hypergraph, S) -> int:
    """e_r(S) - 2|S| for a set S of degree-≥2 vertices."""
    S = set(S)
    W = H.index.W
    if not S <= W:
        raise SContainsLowDegreeVertex(f"vertices {sorted(S - W)} have degree < 2")
    sm = mask_of(S)
    return sum(1 for m in H.masks if m & sm) - 2 * len(S)


def _search(H: Hypergraph, target=None):
    """Branch and bound over subsets of W.

    With ``target=None`` returns the maximum of chi; otherwise returns every
    subset (as vertex bitmask) attaining ``target``.
    """
    W = sorted(H.index.W)
    if len(W) > MAX_W:
        raise TooManyHighDegreeVertices(f"|W| = {len(W)} exceeds {MAX_W}")
    inc = _incidence(H, W)
    incs = [inc[v] for v in W]
    # a vertex of degree d adds at most d - 2 to chi
    gain = [max(0, bin(x).count("1") - 2) for x in incs]
    suffix = [0] * (len(W) + 1)
    for i in range(len(W) - 1, -1, -1):
        suffix[i] = suffix[i + 1] + gain[i]
    best = [0]
    found = []

    def rec(i, covered, size, smask):
        val = covered.bit_count() - 2 * size
        bound = val + suffix[i]
        if target is None:
            if val > best[0]:
                best[0] = val
            if bound <= best[0] or i == len(W):
                return
        else:
            if bound < target:
                return
            if i == len(W):
                if val == target:
                    found.append(smask)
                return
        rec(i + 1, covered | incs[i], size + 1, smask | (1 << (W[i] - 1)))
        rec(i + 1, covered, size, smask)

    rec(0, 0, 0, 0)
    return best[0] if target is None else found


def chi_star(H: Hypergraph) -> int:
    """max chi over subsets of the degree-≥2 vertices (0 for the empty set)."""
    return _search(H)


def chi_star_and_Sr(H: Hypergraph):
    """(chi*, family of all maximizers) with sets as frozensets of vertices."""
    cs = _search(H)
    sets = _search(H, target=cs)
    return cs, frozenset(frozenset(vertices_of(m)) for m in sets)


def extension_quality(H: Hypergraph, E, chi_star_value: int | None = None) -> str:
    """Label a candidate edge as Good, BadNotAlmostSimple or BadChi."""
    em = E.mask if isinstance(E, KSet) else mask_of(E)
    if any(not (em & m) for m in H.masks):
        raise NotAnExtension("edge misses an existing edge")
    deg = H.index.degree
    for m in H.masks:
        common = em & m
        if common & (common - 1):  # at least two shared vertices
            if any(deg[v] < 2 for v in vertices_of(common)):
                return BAD_NOT_ALMOST_SIMPLE
    W = H.index.W
    S = [v for v in vertices_of(em) if v in W]
    cs = chi_star(H) if chi_star_value is None else chi_star_value
    sm = mask_of(S)
    chi_S = sum(1 for m in H.masks if m & sm) - 2 * len(S)
    return GOOD if chi_S == cs else BAD_CHI


def _independent_subsets(J, base_masks):
    """Nonempty subsets of J with no base edge holding two members."""
    J = sorted(J)
    conflict = {}
    for v in J:
        bit = 1 << (v - 1)
        c = 0
        for m in base_masks:
            if m & bit:
                c |= m
        conflict[v] = c & ~bit
    out = []

    def rec(i, smask, blocked):
        if i == len(J):
            if smask:
                out.append(smask)
            return
        v = J[i]
        bit = 1 << (v - 1)
        if not blocked & bit:
            rec(i + 1, smask | bit, blocked | conflict[v])
        rec(i + 1, smask, blocked)

    rec(0, 0, 0)
    return out


def _pairwise_intersecting(masks):
    for i in range(len(masks)):
        a = masks[i]
        for j in range(i + 1, len(masks)):
            if not a & masks[j]:
                return False
    return True


def _fs(masks):
    return frozenset(frozenset(vertices_of(m)) for m in masks)


@dataclass
class StructureState:
    n: int
    k: int
    r0: int | None = None
    r1: int | None = None
    J: frozenset = frozenset()
    chi_star: int | None = None
    S_r: dict = field(default_factory=dict)
    S_stable: frozenset | None = None
    base: list = field(default_factory=list)
    edges: list = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return self.r0 is not None and self.r1 is not None

    def report(self) -> dict:
        return {
            "r0": self.r0,
            "r1": self.r1,
            "n_stable": None if self.S_stable is None else len(self.S_stable),
            "stable_sizes": None if self.S_stable is None
            else sorted(len(S) for S in self.S_stable),
        }


def hitting_times(trace, check: bool = False) -> StructureState:
    """Compute r0, J, the families S_r for r >= r0, r1 and the stable family.

    ``trace`` is anything with ``n``, ``k`` and ``edges``. With ``check=True``
    the S_r from the independent-set definition are compared with the
    chi-maximizer definition at every step whose prefix consists of good
    extensions (as labelled in ``trace.quality`` when present).
    """
    n, k = trace.n, trace.k
    edges = list(trace.edges)
    st = StructureState(n, k, edges=edges)
    idx = DegreeIndex()
    for r, e in enumerate(edges, 1):
        idx.add(e.vertices)
        if idx.maxdeg >= 3:
            st.r0 = r
            break
    if st.r0 is None:
        return st
    r0 = st.r0
    st.base = edges[: r0 - 1]
    base_h = Hypergraph(n, k, st.base)
    st.J = base_h.index.W
    if len(st.J) > MAX_J:
        raise TooManyHighDegreeVertices(f"|J| = {len(st.J)} exceeds {MAX_J}")
    cur = _independent_subsets(st.J, base_h.masks)
    quality = getattr(trace, "quality", None)
    for r in range(r0, len(edges) + 1):
        em = edges[r - 1].mask
        cur = [S for S in cur if S & em]
        st.S_r[r] = _fs(cur)
        if check and quality is not None and all(q == GOOD for q in quality[:r]):
            Hr = Hypergraph(n, k, edges[:r])
            cs, fam = chi_star_and_Sr(Hr)
            assert fam == st.S_r[r], f"S_r definitions disagree at r={r}"
            assert cs == r - r0 + 1
        if _pairwise_intersecting(cur):
            st.r1 = r
            st.S_stable = _fs(cur)
            break
    if st.r1 is not None:
        H1 = Hypergraph(n, k, edges[: st.r1])
        if len(H1.index.W) <= MAX_W:
            st.chi_star = chi_star(H1)
    return st


@dataclass
class FamilyBounds:
    n: int
    k: int
    base: list
    S_stable: frozenset
    r0: int
    lower_size: int | None = None
    upper_size: int | None = None
    asymptotic_density: float | None = None

    def __post_init__(self):
        self._base_masks = [e.mask for e in self.base]
        self._S_masks = [mask_of(S) for S in self.S_stable]
        self._base_set = set(self._base_masks)

    def _meets_base(self, m):
        return all(m & b for b in self._base_masks)

    def in_lower(self, E) -> bool:
        m = E.mask if isinstance(E, KSet) else int(E)
        if m in self._base_set:
            return True
        return self._meets_base(m) and any(m & s == s for s in self._S_masks)

    def in_upper(self, E) -> bool:
        m = E.mask if isinstance(E, KSet) else int(E)
        if m in self._base_set:
            return True
        return self._meets_base(m) and all(m & s for s in self._S_masks)

    def masks_predicates(self, masks: np.ndarray):
        """Vectorised (lower, upper) membership over uint64 masks."""
        meets = np.ones(masks.shape, dtype=bool)
        for b in self._base_masks:
            meets &= (masks & np.uint64(b)) != 0
        contains = np.zeros(masks.shape, dtype=bool)
        meets_all = np.ones(masks.shape, dtype=bool)
        for s in self._S_masks:
            s64 = np.uint64(s)
            hit = masks & s64
            contains |= hit == s64
            meets_all &= hit != 0
        in_base = np.isin(masks, np.array(self._base_masks, dtype=np.uint64))
        return in_base | (meets & contains), in_base | (meets & meets_all)

    @property
    def lower_density(self):
        return None if self.lower_size is None else self.lower_size / binom(self.n, self.k)

    @property
    def upper_density(self):
        return None if self.upper_size is None else self.upper_size / binom(self.n, self.k)


def _exact_sizes(n, k, base_masks, J_mask, S_masks):
    """|I*| and |I**| by splitting every candidate on its trace T = E ∩ J."""
    J = vertices_of(J_mask)
    lower = upper = 0
    for bits in range(1 << len(J)):
        T = 0
        for i, v in enumerate(J):
            if bits >> i & 1:
                T |= 1 << (v - 1)
        contains = any(T & s == s for s in S_masks)
        meets_all = all(T & s for s in S_masks)
        if not (contains or meets_all) or T.bit_count() > k:
            continue
        cnt = count_open_masks(base_masks, n, k, T, J_mask & ~T)
        if contains:
            lower += cnt
        if meets_all:
            upper += cnt
    # base edges belong to both families outright
    for b in base_masks:
        T = b & J_mask
        if not any(T & s == s for s in S_masks):
            lower += 1
        if not all(T & s for s in S_masks):
            upper += 1
    return lower, upper


def build_bounds(state: StructureState, exact: bool = True, max_J: int = 16) -> FamilyBounds:
    """The sandwich families I* ⊆ I** from a completed structure state."""
    if not state.complete:
        raise IncompleteState("r0 and r1 must both be resolved")
    fb = FamilyBounds(state.n, state.k, state.base, state.S_stable, state.r0)
    if state.S_stable and all(2 * len(S) <= state.r0 - 1 for S in state.S_stable):
        fb.asymptotic_density = family_size_asymptotic(
            ProcessParams(state.n, state.k), state.r0, state.S_stable
        )
    J_mask = mask_of(state.J)
    if exact and len(state.J) <= max_J:
        try:
            fb.lower_size, fb.upper_size = _exact_sizes(
                state.n, state.k, fb._base_masks, J_mask, fb._S_masks
            )
        except InfeasibleQuery:
            pass
    return fb


@dataclass
class FamilyClass:
    tag: str
    center: int | None = None
    edge: KSet | None = None
    ground: frozenset = frozenset()
    generators: frozenset = frozenset()
    evidence: dict = field(default_factory=dict)


def _final_masks(final):
    members = final.members if hasattr(final, "members") else final
    return np.array(
        [m.mask if isinstance(m, KSet) else int(m) for m in members], dtype=np.uint64
    )


def classify(state: StructureState, final=None) -> FamilyClass:
    """Trivial / Hilton–Milner / other junta, optionally checked against a final family."""
    if not state.complete:
        raise IncompleteState("r0 and r1 must both be resolved")
    fam = state.S_stable
    single = len(fam) == 1 and len(next(iter(fam))) == 1
    ground = frozenset().union(*fam) if fam else frozenset()
    if single and state.r0 == 3:
        x = next(iter(next(iter(fam))))
        fc = FamilyClass(TRIVIAL, center=x, ground=ground)
    elif single and state.r0 == 4:
        v = next(iter(next(iter(fam))))
        avoiding = [e for e in state.base if v not in e]
        fc = FamilyClass(HILTON_MILNER, center=v, ground=ground,
                         edge=avoiding[0] if len(avoiding) == 1 else None)
    else:
        fc = FamilyClass(JUNTA_OTHER, ground=ground)
    # generator family: every subset of the ground set containing some S
    g = sorted(ground)
    S_masks = [mask_of(S) for S in fam]
    gens = []
    for bits in range(1 << len(g)) if len(g) <= 16 else ():
        T = mask_of(v for i, v in enumerate(g) if bits >> i & 1)
        if any(T & s == s for s in S_masks):
            gens.append(frozenset(vertices_of(T)))
    fc.generators = frozenset(gens)
    if final is not None:
        fm = _final_masks(final)
        in_junta = np.zeros(fm.shape, dtype=bool)
        for s in S_masks:
            in_junta |= (fm & np.uint64(s)) == np.uint64(s)
        fc.evidence["junta_miss_fraction"] = float(np.count_nonzero(~in_junta)) / max(len(fm), 1)
        n, k = state.n, state.k
        if fc.tag == TRIVIAL:
            bit = np.uint64(1 << (fc.center - 1))
            fc.evidence["matches_exactly"] = bool(
                len(fm) == binom(n - 1, k - 1) and np.all(fm & bit)
            )
        elif fc.tag == HILTON_MILNER and fc.edge is not None:
            bit = np.uint64(1 << (fc.center - 1))
            F = np.uint64(fc.edge.mask)
            ok = (fm == F) | (((fm & bit) != 0) & ((fm & F) != 0))
            size = 1 + binom(n - 1, k - 1) - binom(n - 1 - k, k - 1)
            fc.evidence["matches_exactly"] = bool(len(fm) == size and np.all(ok))
    return fc


@dataclass
class ContainmentReport:
    lower_ok: bool
    upper_ok: bool
    excess: int
    deficit: int


def verify_containment(bounds: FamilyBounds, final) -> ContainmentReport:
    """Check I* ⊆ I_k ⊆ I** by enumerating every k-set."""
    allm = all_kset_masks(bounds.n, bounds.k)
    lower, upper = bounds.masks_predicates(allm)
    member = np.isin(allm, _final_masks(final))
    deficit = int(np.count_nonzero(lower & ~member))
    excess = int(np.count_nonzero(member & ~upper))
    return ContainmentReport(deficit == 0, excess == 0, excess, deficit)
