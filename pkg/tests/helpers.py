"""Shared fixtures: explicit small hypergraphs."""
import itertools

from ifprocess.setcore import Hypergraph


def simple_deg2(r, k=None, n=None):
    """r edges, every two meeting in their own degree-2 vertex, padded with
    degree-1 vertices. Returns (H, pair_vertex) with pair_vertex[(i, j)]."""
    k = k or max(r - 1, 1) + 2
    pairs = list(itertools.combinations(range(r), 2))
    pv = {p: i + 1 for i, p in enumerate(pairs)}
    nxt = len(pairs) + 1
    edges = []
    for i in range(r):
        e = [pv[p] for p in pairs if i in p]
        while len(e) < k:
            e.append(nxt)
            nxt += 1
        edges.append(e)
    n = n or max(nxt - 1, 2 * k)
    return Hypergraph(n, k, edges), pv
