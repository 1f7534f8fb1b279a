"""Random greedy independent sets, with Kneser graphs as the main example.

An independent set of the Kneser graph K(n, k) (k-sets adjacent when
disjoint) is an intersecting family, so the greedy independent-set process
on K(n, k) is the greedy intersecting process with k proportional to n.
"""
from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DegenerateRegime, TooLarge
from .setcore import all_kset_masks, binom, log_binom

__all__ = [
    "Graph",
    "GreedyTrace",
    "KneserParams",
    "CONSTANT_C",
    "SMALL_K",
    "build_kneser",
    "complete_graph",
    "empty_graph",
    "petersen_graph",
    "graph_from_edges",
    "greedy_independent",
    "kneser_params",
    "codegree_profile",
    "trajectory_check",
    "r_end",
    "write_trajectory_csv",
]

EXPLICIT_LIMIT = 10**5
CONSTANT_C = "ConstantC"
SMALL_K = "SmallK"


@dataclass
class Graph:
    """Simple undirected graph in CSR form.

    For Kneser graphs ``masks[i]`` is the k-set of vertex ``i`` as a bitmask.
    """

    N: int
    indptr: np.ndarray
    indices: np.ndarray
    masks: np.ndarray | None = None
    n: int | None = None
    k: int | None = None

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    @property
    def regular_degree(self) -> int | None:
        deg = np.diff(self.indptr)
        if deg.size and np.all(deg == deg[0]):
            return int(deg[0])
        return None if deg.size else 0

    def adjacent(self, u: int, v: int) -> bool:
        return bool(np.any(self.neighbors(u) == v))


def graph_from_edges(N: int, edges) -> Graph:
    adj = [[] for _ in range(N)]
    for u, v in edges:
        if u == v:
            raise ValueError("loops are not allowed")
        adj[u].append(v)
        adj[v].append(u)
    indptr = np.zeros(N + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(set(a)) for a in adj])
    indices = np.concatenate([np.array(sorted(set(a)), dtype=np.int64) for a in adj]) if N else np.zeros(0, np.int64)
    return Graph(N, indptr, indices)


def complete_graph(N: int) -> Graph:
    return graph_from_edges(N, itertools.combinations(range(N), 2))


def empty_graph(N: int) -> Graph:
    return graph_from_edges(N, [])


def petersen_graph() -> Graph:
    return build_kneser(5, 2)


def build_kneser(n: int, k: int) -> Graph:
    """K(n, k) with vertices in colex order of their k-sets."""
    N = binom(n, k)
    if N > EXPLICIT_LIMIT:
        raise TooLarge(f"C({n},{k}) = {N} exceeds {EXPLICIT_LIMIT}")
    masks = np.asarray(all_kset_masks(n, k))
    order = {int(m): i for i, m in enumerate(masks)}
    full = (1 << n) - 1
    rows = []
    for m in masks:
        comp = full & ~int(m)
        # neighbours are the k-subsets of the complement
        cv = [v for v in range(n) if comp >> v & 1]
        rows.append(sorted(order[sum(1 << v for v in c)] for c in itertools.combinations(cv, k)))
    indptr = np.zeros(N + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(r) for r in rows])
    indices = np.array([x for r in rows for x in r], dtype=np.int64)
    return Graph(N, indptr, indices, masks=masks, n=n, k=k)


@dataclass
class GreedyTrace:
    chosen: list = field(default_factory=list)
    V_size: list = field(default_factory=list)  # V_size[r] after r steps
    closed: list = field(default_factory=list)  # vertices closed by adjacency, cumulative
    tracked: np.ndarray | None = None
    D: np.ndarray | None = None  # D[r, j]: available neighbours of tracked j, -1 once unavailable
    C: np.ndarray | None = None  # C[r, j]: available neighbours of tracked j lying in B
    B_size: list = field(default_factory=list)
    N: int = 0
    d: int | None = None
    threshold: float | None = None

    @property
    def size(self) -> int:
        return len(self.chosen)

    @property
    def t(self) -> np.ndarray:
        if not self.d:
            return np.zeros(len(self.V_size))
        return self.d * np.arange(len(self.V_size)) / self.N


def _blacklist_overlap(G: Graph, threshold: float) -> int | None:
    """Smallest intersection size whose codegree reaches ``threshold``."""
    n, k = G.n, G.k
    for s in range(k + 1):
        if binom(n - (2 * k - s), k) >= threshold:
            return s
    return None


def greedy_independent(G: Graph, rng, tracked_sample_size: int = 64,
                       codegree_threshold: float | None = None) -> GreedyTrace:
    """Random greedy independent set, run until nothing is available.

    On Kneser graphs the blacklist B(r) holds available vertices whose
    codegree with some chosen vertex is at least ``codegree_threshold``
    (default d·N^{-ε} with ε from :func:`kneser_params`).
    """
    N = G.N
    d = G.regular_degree
    avail = np.ones(N, dtype=bool)
    tr = GreedyTrace(N=N, d=d)
    m = min(tracked_sample_size, N)
    tr.tracked = np.sort(rng.choice(N, size=m, replace=False)) if m else np.zeros(0, np.int64)
    tnbrs = [G.neighbors(int(v)) for v in tr.tracked]
    inB = np.zeros(N, dtype=bool)
    s_min = None
    if G.masks is not None:
        if codegree_threshold is None and 0 < G.k and 2 * G.k < G.n:
            p = kneser_params(G.n, G.k)
            codegree_threshold = d * math.exp(-p.epsilon * math.log(N))
        if codegree_threshold is not None:
            tr.threshold = codegree_threshold
            s_min = _blacklist_overlap(G, codegree_threshold)
    D_rows, C_rows = [], []

    def snapshot():
        tr.V_size.append(int(avail.sum()))
        tr.B_size.append(int(np.count_nonzero(inB & avail)))
        D_rows.append([int(avail[nb].sum()) if avail[v] else -1 for v, nb in zip(tr.tracked, tnbrs)])
        C_rows.append([int((avail[nb] & inB[nb]).sum()) if avail[v] else -1 for v, nb in zip(tr.tracked, tnbrs)])

    closed = 0
    tr.closed.append(0)
    snapshot()
    while True:
        live = np.flatnonzero(avail)
        if not live.size:
            break
        v = int(live[rng.integers(live.size)])
        tr.chosen.append(v)
        avail[v] = False
        nb = G.neighbors(v)
        closed += int(avail[nb].sum())
        avail[nb] = False
        if s_min is not None:
            inter = np.bitwise_count(G.masks & G.masks[v])
            inB |= inter >= s_min
        tr.closed.append(closed)
        snapshot()
        assert tr.V_size[-1] == N - len(tr.chosen) - closed
    tr.D = np.array(D_rows, dtype=np.int64).reshape(len(D_rows), m)
    tr.C = np.array(C_rows, dtype=np.int64).reshape(len(C_rows), m)
    # maximal and independent
    chosen = np.zeros(N, dtype=bool)
    chosen[tr.chosen] = True
    for v in tr.chosen:
        assert not chosen[G.neighbors(v)].any()
    covered = chosen.copy()
    for v in tr.chosen:
        covered[G.neighbors(v)] = True
    assert covered.all()
    return tr


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _g(x: float) -> float:
    return x * math.log(x) if x > 0 else 0.0


@dataclass(frozen=True)
class KneserParams:
    n: int
    k: int
    c: float
    N: int
    d: int
    gamma: float
    p_N: float
    p_d: float
    eps1: float
    eps2: float
    epsilon: float
    delta_star: float
    delta: float
    alpha: float
    beta: float

    def f(self, t, regime: str = CONSTANT_C):
        """Error envelope of the good event."""
        t = np.asarray(t, dtype=float)
        if regime == CONSTANT_C:
            return math.exp(-self.epsilon / 20 * log_binom(self.n, self.k)) * np.exp(10 * t)
        if regime == SMALL_K:
            return self.gamma ** 0.1 * np.exp(10 * t)
        raise ValueError(f"unknown regime {regime!r}")


def p_1(c: float, delta: float) -> float:
    return _g(1 - c - delta) - _g(c) - _g(1 - 2 * c - delta)


def p_2(c: float, delta: float) -> float:
    return _g(c) - _g(c - delta) - 2 * _g(delta) - _g(1 - delta)


@lru_cache(maxsize=64)
def kneser_params(n: int, k: int) -> KneserParams:
    """Exact N, d and the exponent gaps, plus the small-k quantities."""
    if not (0 < k and 2 * k < n):
        raise DegenerateRegime(f"need 0 < k < n/2, got n={n}, k={k}")
    c = k / n
    N, d = binom(n, k), binom(n - k, k)
    gamma = math.exp(log_binom(n - k, k) - log_binom(n, k))
    pN = -_g(c) - _g(1 - c)
    pd = _g(1 - c) - _g(c) - _g(1 - 2 * c)
    eps1 = min(pd / pN, 1 - pd / pN)

    def gap(delta):
        return min(pd - p_1(c, delta), pd - p_2(c, delta)) / pN

    hi = min(c, 1 - 2 * c)
    res = minimize_scalar(lambda x: -gap(x), bounds=(0.0, hi), method="bounded",
                          options={"xatol": 1e-9})
    delta_star = float(res.x)
    eps2 = gap(delta_star)
    delta = 0.9 * c
    alpha = _exp(log_binom(n - k, k) - 0.9 * c * c * n)
    beta = _exp((delta * math.log(c / delta ** 2) + 2 * delta - delta ** 2 / c) * n)
    return KneserParams(n, k, c, N, d, gamma, pN, pd, eps1, eps2, min(eps1, eps2),
                        delta_star, delta, alpha, beta)


def r_end(params: KneserParams, regime: str = CONSTANT_C) -> int:
    """Last step covered by the good event in each regime (floored)."""
    if params.gamma >= 1 or params.d == 0:
        raise DegenerateRegime("need 0 < d < N")
    if regime == CONSTANT_C:
        return math.floor(params.epsilon / 1000 * params.N * math.log(params.N) / params.d)
    if regime == SMALL_K:
        g = params.gamma
        return math.floor(0.001 / g * math.log(1 / g))
    raise ValueError(f"unknown regime {regime!r}")


def codegree_profile(n: int, k: int, check_pairs: int = 100, rng=None) -> dict:
    """Codegree of a reference k-set with every other one, by intersection size.

    The closed form binom(n - |S ∪ S'|, k) is checked against explicit
    common-neighbour counts for ``check_pairs`` random pairs.
    """
    G = build_kneser(n, k)
    ref = G.masks[0]
    inter = np.bitwise_count(G.masks & ref)
    hist = {}
    for s in range(k + 1):
        cnt = int(np.count_nonzero(inter == s)) - (1 if s == k else 0)
        if cnt:
            hist[s] = {"count": cnt, "codegree": int(binom(n - (2 * k - s), k))}
    if check_pairs and rng is not None:
        for _ in range(check_pairs):
            u, v = (int(x) for x in rng.choice(G.N, size=2, replace=False))
            common = np.intersect1d(G.neighbors(u), G.neighbors(v)).size
            union = int(G.masks[u] | G.masks[v]).bit_count()
            assert common == binom(n - union, k)
    report = {"histogram": hist}
    if 2 * k < n:
        p = kneser_params(n, k)
        thr = p.d * p.N ** (-p.epsilon)
        heavy = sum(h["count"] for h in hist.values() if h["codegree"] >= thr)
        report.update({"threshold": thr, "heavy_mass": heavy, "heavy_ok": heavy <= thr})
    return report


def trajectory_check(trace: GreedyTrace, params: KneserParams | None = None,
                     regime: str = CONSTANT_C, t_max: float = 1.0) -> dict:
    """Deviations of V_size/N and D_v/d from e^{-t}, with envelope flags."""
    N = trace.N
    t = trace.t
    pred = np.exp(-t)
    v_dev = np.abs(np.asarray(trace.V_size) / N - pred)
    window = t <= t_max
    report = {
        "steps": len(trace.V_size) - 1,
        "final_size": trace.size,
        "sup_V_dev": float(v_dev[window].max()),
        "V_dev_quantiles": [float(x) for x in np.quantile(v_dev, [0.5, 0.9, 1.0])],
    }
    if trace.d:
        D = trace.D.astype(float)
        live = D >= 0
        d_dev = np.where(live, np.abs(D / trace.d - pred[:, None]), np.nan)
        if np.any(live[window]):
            report["sup_D_dev"] = float(np.nanmax(d_dev[window]))
        if trace.C.size:
            report["max_C"] = int(trace.C.max())
    if params is not None and trace.d:
        f = params.f(t, regime)
        report["V_envelope_violations"] = int(np.count_nonzero(v_dev > f))
        try:
            re = r_end(params, regime)
        except DegenerateRegime:
            re = None
        report["r_end"] = re
        if re is not None:
            report["V_violations_before_r_end"] = int(np.count_nonzero((v_dev > f)[: re + 1]))
        report["note"] = "asymptotic-motivated, desk-scale diagnostic"
    return report


def write_trajectory_csv(trace: GreedyTrace, path) -> None:
    """Columns r, t, V_size, mean tracked D_v, B_size, max C_v."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "t", "V_size", "mean_D", "B_size", "max_C"])
        for r, (t, v, b) in enumerate(zip(trace.t, trace.V_size, trace.B_size)):
            row = trace.D[r]
            live = row[row >= 0]
            mean_d = float(live.mean()) if live.size else float("nan")
            max_c = int(trace.C[r].max()) if trace.C.size else 0
            w.writerow([r, f"{t:.6g}", v, f"{mean_d:.6g}", b, max_c])
