"""Independent reference implementations used by the tests."""
import math

import numpy as np

from girgfpp.graph import SpatialGraph
from girgfpp.spatial import PointSet


def random_graph(rng, n, p, length_sampler=None):
    iu = np.triu_indices(n, 1)
    keep = rng.random(iu[0].size) < p
    edges = np.stack([iu[0][keep], iu[1][keep]], 1)
    lengths = None
    if length_sampler is not None:
        lengths = length_sampler(edges.shape[0])
    pts = PointSet(np.zeros((n, 1)))
    return SpatialGraph(pts, np.ones(n), edges, lengths)


def enumerate_paths_min(g, s, t):
    """Minimum total length over all simple s-t paths (exhaustive DFS)."""
    if s == t:
        return 0.0
    adj = {v: [(int(u), float(g.lengths[g.edge_index(v, u)])) for u in g.neighbors(v)] for v in range(g.n)}
    best = math.inf
    seen = [False] * g.n

    def dfs(v, acc):
        nonlocal best
        if v == t:
            best = min(best, acc)
            return
        seen[v] = True
        for u, w in adj[v]:
            if not seen[u]:
                dfs(u, acc + w)
        seen[v] = False

    dfs(s, 0.0)
    return best


def relaxation_distances(g, s):
    """Bellman-Ford style matrix relaxation."""
    d = np.full(g.n, math.inf)
    d[s] = 0.0
    e = g.edges
    L = g.lengths
    for _ in range(g.n):
        nd = d.copy()
        np.minimum.at(nd, e[:, 1], d[e[:, 0]] + L)
        np.minimum.at(nd, e[:, 0], d[e[:, 1]] + L)
        if np.array_equal(nd, d):
            break
        d = nd
    return d


def closure_layers(g, v, k):
    """B^G(v,j) for j <= k by repeated one-step closure."""
    ball = {v}
    layers = [{v}]
    for _ in range(k):
        nxt = set(ball)
        for x in ball:
            nxt.update(int(u) for u in g.neighbors(x))
        layers.append(nxt - ball)
        ball = nxt
    return ball, layers
