"""First passage percolation: keyed edge lengths, d_L / d_G, balls and explosion proxies.

Unreachable distances are ``math.inf`` and are written as the literal ``inf``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .dist import EdgeLengthDistribution
from .graph import SpatialGraph
from .rng import SALT_LENGTH, keyed_uniform
from .spatial import ContractError

INF = math.inf


def assign_edge_lengths(g: SpatialGraph, dist: EdgeLengthDistribution, seed: int,
                        overwrite: bool = False) -> SpatialGraph:
    """i.i.d. lengths keyed by the unordered pair of vertex keys."""
    if g.lengths is not None and not overwrite:
        raise ContractError("graph already has lengths (pass overwrite=True)")
    ku, kv = g.keys[g.edges[:, 0]], g.keys[g.edges[:, 1]]
    lengths = np.asarray(dist.from_uniform(keyed_uniform(seed, ku, kv, salt=SALT_LENGTH)), float)
    out = SpatialGraph(g.points, g.weights, g.edges, lengths,
                       {**g.provenance, "length_law": dist.spec, "length_seed": int(seed)}, g.keys)
    return out


# ---------------------------------------------------------------------------
# compiled kernels


@numba.njit(cache=True)
def _heap_push(hd, hv, size, d, v):
    if size >= hd.shape[0]:
        nd = np.empty(hd.shape[0] * 2)
        nv = np.empty(hd.shape[0] * 2, dtype=np.int64)
        nd[:size] = hd[:size]
        nv[:size] = hv[:size]
        hd, hv = nd, nv
    i = size
    hd[i] = d
    hv[i] = v
    while i > 0:
        p = (i - 1) >> 1
        if hd[p] <= hd[i]:
            break
        hd[p], hd[i] = hd[i], hd[p]
        hv[p], hv[i] = hv[i], hv[p]
        i = p
    return hd, hv, size + 1


@numba.njit(cache=True)
def _heap_pop(hd, hv, size):
    d, v = hd[0], hv[0]
    size -= 1
    hd[0], hv[0] = hd[size], hv[size]
    i = 0
    while True:
        left = 2 * i + 1
        if left >= size:
            break
        c = left
        if left + 1 < size and hd[left + 1] < hd[left]:
            c = left + 1
        if hd[i] <= hd[c]:
            break
        hd[c], hd[i] = hd[i], hd[c]
        hv[c], hv[i] = hv[i], hv[c]
        i = c
    return d, v, size


@numba.njit(cache=True)
def dijkstra_kernel(indptr, nb, eid, lens, sources, target, stop_mask, use_mask, cutoff, max_settled):
    """Label-setting search. Returns (dist, pred, settled order, hit).

    Stops when ``target`` is settled, when a vertex with ``stop_mask`` is
    settled (if ``use_mask``), when the next label exceeds ``cutoff``, or after
    ``max_settled`` vertices. Unsettled vertices keep dist = inf.
    """
    n = indptr.shape[0] - 1
    dist = np.full(n, np.inf)
    pred = np.full(n, -1, dtype=np.int64)
    done = np.zeros(n, dtype=np.bool_)
    order = np.empty(n, dtype=np.int64)
    hd = np.empty(64)
    hv = np.empty(64, dtype=np.int64)
    size = 0
    tent = np.full(n, np.inf)
    for s in sources:
        tent[s] = 0.0
        hd, hv, size = _heap_push(hd, hv, size, 0.0, s)
    nset = 0
    hit = -1
    while size > 0:
        d, v, size = _heap_pop(hd, hv, size)
        if done[v] or d > tent[v]:
            continue
        if d > cutoff:
            break
        done[v] = True
        dist[v] = d
        order[nset] = v
        nset += 1
        if v == target or (use_mask and stop_mask[v]):
            hit = v
            break
        if nset >= max_settled:
            break
        for t in range(indptr[v], indptr[v + 1]):
            u = nb[t]
            if done[u]:
                continue
            nd = d + lens[eid[t]]
            if nd < tent[u]:
                tent[u] = nd
                pred[u] = v
                hd, hv, size = _heap_push(hd, hv, size, nd, u)
    return dist, pred, order[:nset], hit


@numba.njit(cache=True)
def bfs_kernel(indptr, nb, source, target, max_depth):
    """Hop distances from ``source`` (-1 = unreached); stops early at ``target``."""
    n = indptr.shape[0] - 1
    depth = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    depth[source] = 0
    queue[0] = source
    head, tail = 0, 1
    while head < tail:
        v = queue[head]
        head += 1
        if v == target or depth[v] >= max_depth:
            if v == target:
                break
            continue
        for t in range(indptr[v], indptr[v + 1]):
            u = nb[t]
            if depth[u] < 0:
                depth[u] = depth[v] + 1
                queue[tail] = u
                tail += 1
                if u == target:
                    return depth
    return depth


@numba.njit(cache=True)
def _hop_dijkstra(indptr, nb, eid, lens, source):
    """Lexicographic (length, hops) labels: the fewest hops among shortest paths."""
    n = indptr.shape[0] - 1
    dist = np.full(n, np.inf)
    hops = np.full(n, -1, dtype=np.int64)
    done = np.zeros(n, dtype=np.bool_)
    # encode (d, h) in the heap by popping on d and re-checking h
    hd = np.empty(64)
    hv = np.empty(64, dtype=np.int64)
    size = 0
    dist[source] = 0.0
    hops[source] = 0
    hd, hv, size = _heap_push(hd, hv, size, 0.0, source)
    while size > 0:
        d, v, size = _heap_pop(hd, hv, size)
        if done[v] or d > dist[v]:
            continue
        done[v] = True
        for t in range(indptr[v], indptr[v + 1]):
            u = nb[t]
            nd = d + lens[eid[t]]
            if nd < dist[u] or (nd == dist[u] and not done[u] and hops[v] + 1 < hops[u]):
                dist[u] = nd
                hops[u] = hops[v] + 1
                hd, hv, size = _heap_push(hd, hv, size, nd, u)
    return dist, hops


# ---------------------------------------------------------------------------
# public API


def _lengths(g: SpatialGraph) -> np.ndarray:
    if g.lengths is None:
        raise ContractError("edge lengths are not assigned")
    if g.lengths.size and g.lengths.min() < 0:
        raise ContractError("negative edge length")
    return g.lengths


def _run(g, sources, target=-1, mask=None, cutoff=INF, max_settled=None):
    ip, nb, eid = g.csr
    use = mask is not None
    m = mask if use else np.zeros(1, dtype=np.bool_)
    return dijkstra_kernel(ip, nb, eid, _lengths(g), np.asarray(sources, np.int64), int(target), m,
                           use, float(cutoff), g.n if max_settled is None else int(max_settled))


def _path(pred, v) -> list[int]:
    out = [int(v)]
    while pred[out[-1]] >= 0:
        out.append(int(pred[out[-1]]))
    return out[::-1]


def shortest_weighted(g: SpatialGraph, u: int, v) -> tuple[float, list[int]]:
    """d_L from u to a vertex or to a set of vertices, with one optimal path."""
    if isinstance(v, (int, np.integer)):
        dist, pred, _, hit = _run(g, [u], target=int(v))
    else:
        mask = np.zeros(g.n, dtype=np.bool_)
        mask[np.asarray(list(v), dtype=np.int64)] = True
        dist, pred, _, hit = _run(g, [u], mask=mask)
    if hit < 0:
        return INF, []
    return float(dist[hit]), _path(pred, hit)


def single_source(g: SpatialGraph, u: int) -> np.ndarray:
    return _run(g, [u])[0]


def graph_distance(g: SpatialGraph, u: int, v: int) -> float:
    ip, nb, _ = g.csr
    dep = bfs_kernel(ip, nb, int(u), int(v), g.n)
    return float(dep[v]) if dep[v] >= 0 else INF


def graph_ball(g: SpatialGraph, v: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """(B^G(v,k), boundary at exactly k hops), both sorted."""
    if k < 0:
        raise ValueError("k must be >= 0")
    ip, nb, _ = g.csr
    dep = bfs_kernel(ip, nb, int(v), -1, int(k))
    return np.flatnonzero((dep >= 0) & (dep <= k)), np.flatnonzero(dep == k)


def graph_layers(g: SpatialGraph, v: int, k_max: int) -> np.ndarray:
    ip, nb, _ = g.csr
    return bfs_kernel(ip, nb, int(v), -1, int(k_max))


def weighted_ball(g: SpatialGraph, v: int, t: float) -> np.ndarray:
    if t < 0:
        raise ValueError("t must be >= 0")
    dist = _run(g, [v], cutoff=t)[0]
    return np.flatnonzero(dist <= t)


def hop_constrained_ball(g: SpatialGraph, v: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Vertices whose fewest-hop shortest-length path has <= k edges, and those with exactly k."""
    ip, nb, eid = g.csr
    _, hops = _hop_dijkstra(ip, nb, eid, _lengths(g), int(v))
    return np.flatnonzero((hops >= 0) & (hops <= k)), np.flatnonzero(hops == k)


@dataclass(frozen=True)
class ExplosionProxy:
    tau_values: np.ndarray
    x_values: np.ndarray


def explosion_proxy(g: SpatialGraph, v: int, K: int, k_max: int) -> ExplosionProxy:
    """tau(v,k): distance to the k-th closest vertex (k=1 is v); X_k = d_L(v, layer k)."""
    if K < 1 or k_max < 1:
        raise ValueError("K and k_max must be >= 1")
    dist, _, order, _ = _run(g, [v])
    tau = dist[order[:K]]
    dep = graph_layers(g, v, k_max)
    xs = np.full(k_max, INF)
    for k in range(1, k_max + 1):
        layer = dep == k
        if layer.any():
            xs[k - 1] = dist[layer].min()
    return ExplosionProxy(np.asarray(tau, float), xs)


def t_k_proxy(g: SpatialGraph, v: int, K_weight: float) -> tuple[float, int | None]:
    """d_L(v, {u : W_u >= K_weight}) and the first vertex reached."""
    mask = g.weights >= K_weight
    if not mask.any():
        return INF, None
    dist, _, _, hit = _run(g, [v], mask=mask)
    if hit < 0:
        return INF, None
    return float(dist[hit]), int(hit)


def write_proxy_csv(proxy: ExplosionProxy, path) -> None:
    rows = ["k,tau_k,x_k"]
    for k in range(1, max(len(proxy.tau_values), len(proxy.x_values)) + 1):
        t = proxy.tau_values[k - 1] if k <= len(proxy.tau_values) else None
        x = proxy.x_values[k - 1] if k <= len(proxy.x_values) else None
        rows.append(f"{k},{fmt(t)},{fmt(x)}")
    with open(path, "w") as fh:
        fh.write("\n".join(rows) + "\n")


def fmt(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if math.isinf(x):
        return "inf"
    return repr(x)
