"""The immutable spatial graph shared by every model, its CSR view and SGX files."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path

import numba
import numpy as np

from .spatial import ContractError, PointSet


def _canonical_edges(edges) -> np.ndarray:
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    e = np.sort(e, axis=1)
    if e.size and np.any(e[:, 0] == e[:, 1]):
        raise ContractError("self-loops are not allowed")
    order = np.lexsort((e[:, 1], e[:, 0]))
    e = e[order]
    if e.shape[0] > 1 and np.any(np.all(e[1:] == e[:-1], axis=1)):
        raise ContractError("duplicate edges")
    return e


@dataclass(frozen=True, eq=False)
class SpatialGraph:
    """Vertices with positions and weights, sorted edge list (u < v) and optional lengths.

    ``keys`` are the entity keys used for keyed randomness; they survive taking
    subgraphs so that coupled graphs draw identical per-pair values.
    """

    points: PointSet
    weights: np.ndarray
    edges: np.ndarray
    lengths: np.ndarray | None = None
    provenance: dict = field(default_factory=dict)
    keys: np.ndarray | None = None

    def __post_init__(self):
        w = np.array(self.weights, dtype=float, copy=True).reshape(-1)
        if w.size != len(self.points):
            raise ContractError("one weight per vertex")
        if w.size and w.min() < 1.0:
            raise ContractError("weights must be >= 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        e = _canonical_edges(self.edges)
        if e.size and (e.min() < 0 or e.max() >= w.size):
            raise ContractError("edge endpoint out of range")
        if self.lengths is not None:
            # lengths are given in the order of the edges argument
            raw = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
            lo = np.minimum(raw[:, 0], raw[:, 1])
            hi = np.maximum(raw[:, 0], raw[:, 1])
            order = np.lexsort((hi, lo))
            ln = np.array(self.lengths, dtype=float).reshape(-1)[order]
            if ln.size != e.shape[0]:
                raise ContractError("one length per edge")
            if ln.size and np.nanmin(ln) < 0:
                raise ContractError("negative edge length")
            ln.setflags(write=False)
            object.__setattr__(self, "lengths", ln)
        e.setflags(write=False)
        object.__setattr__(self, "edges", e)
        k = np.arange(w.size, dtype=np.int64) if self.keys is None else np.array(self.keys, dtype=np.int64)
        k.setflags(write=False)
        object.__setattr__(self, "keys", k)

    @property
    def n(self) -> int:
        return self.weights.size

    @property
    def m(self) -> int:
        return self.edges.shape[0]

    @property
    def d(self) -> int:
        return self.points.d

    @property
    def coords(self) -> np.ndarray:
        return self.points.coords

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(indptr, neighbours, edge index) with each neighbour list sorted."""
        return _build_csr(self.n, self.edges)

    def neighbors(self, v: int) -> np.ndarray:
        ip, nb, _ = self.csr
        return nb[ip[v]:ip[v + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.csr[0])

    def edge_index(self, u: int, v: int) -> int:
        """Row of edge {u,v} in ``edges`` or -1."""
        ip, nb, eid = self.csr
        lo, hi = ip[u], ip[u + 1]
        j = lo + np.searchsorted(nb[lo:hi], v)
        return int(eid[j]) if j < hi and nb[j] == v else -1

    def with_lengths(self, lengths) -> "SpatialGraph":
        return replace(self, lengths=np.asarray(lengths, dtype=float))

    def edge_subgraph(self, keep: np.ndarray, **prov) -> "SpatialGraph":
        keep = np.asarray(keep, dtype=bool)
        return SpatialGraph(self.points, self.weights, self.edges[keep],
                            None if self.lengths is None else self.lengths[keep],
                            {**self.provenance, **prov}, self.keys)

    def induced(self, ids) -> "SpatialGraph":
        """Subgraph on ``ids`` (increasing); vertices are renumbered 0..len-1."""
        ids = np.asarray(ids, dtype=np.int64)
        pos = np.full(self.n, -1, dtype=np.int64)
        pos[ids] = np.arange(ids.size)
        e = pos[self.edges]
        keep = (e[:, 0] >= 0) & (e[:, 1] >= 0)
        return SpatialGraph(self.points.subset(ids), self.weights[ids], e[keep],
                            None if self.lengths is None else self.lengths[keep],
                            dict(self.provenance), self.keys[ids])

    def edge_set(self, by_key: bool = True) -> set:
        e = self.keys[self.edges] if by_key else self.edges
        return set(map(tuple, np.sort(e, axis=1).tolist()))


@numba.njit(cache=True)
def _csr_fill(n, edges, indptr, nb, eid):
    fill = indptr[:-1].copy()
    for i in range(edges.shape[0]):
        u, v = edges[i, 0], edges[i, 1]
        nb[fill[u]] = v
        eid[fill[u]] = i
        fill[u] += 1
        nb[fill[v]] = u
        eid[fill[v]] = i
        fill[v] += 1


def _build_csr(n, edges):
    deg = np.bincount(edges.reshape(-1), minlength=n) if edges.size else np.zeros(n, np.int64)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(deg, out=indptr[1:])
    nb = np.empty(2 * edges.shape[0], dtype=np.int64)
    eid = np.empty(2 * edges.shape[0], dtype=np.int64)
    if edges.size:
        _csr_fill(n, np.ascontiguousarray(edges), indptr, nb, eid)
        # sort each neighbour list (edges are lexicographic, so only the "v side" needs it)
        order = np.lexsort((nb, np.repeat(np.arange(n), deg)))
        nb, eid = nb[order], eid[order]
    for arr in (indptr, nb, eid):
        arr.setflags(write=False)
    return indptr, nb, eid


# ---------------------------------------------------------------------------
# SGX v1


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _fmt(x: float) -> str:
    return "inf" if x == float("inf") else repr(float(x))


def write_sgx(g: SpatialGraph, path: str | Path) -> None:
    custom_keys = not np.array_equal(g.keys, np.arange(g.n))
    lines = [
        f"SGX v1 n={g.n} m={g.m} d={g.d} side={g.points.side!r} metric={g.points.metric} "
        f"lengths={int(g.lengths is not None)} keys={int(custom_keys)}",
        "prov " + json.dumps(_jsonable(g.provenance), sort_keys=True),
    ]
    for i in range(g.n):
        toks = ["v", str(i)] + [repr(float(x)) for x in g.coords[i]] + [repr(float(g.weights[i]))]
        if custom_keys:
            toks.append(str(int(g.keys[i])))
        lines.append(" ".join(toks))
    for j, (u, v) in enumerate(g.edges.tolist()):
        if g.lengths is None:
            lines.append(f"e {u} {v}")
        else:
            lines.append(f"e {u} {v} {_fmt(g.lengths[j])}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_sgx(path: str | Path) -> SpatialGraph:
    lines = Path(path).read_text().splitlines()
    head = lines[0].split()
    if head[:2] != ["SGX", "v1"]:
        raise ContractError("not an SGX v1 file")
    meta = dict(tok.split("=", 1) for tok in head[2:])
    d, n = int(meta["d"]), int(meta["n"])
    has_len, has_keys = meta["lengths"] == "1", meta.get("keys") == "1"
    prov = json.loads(lines[1][len("prov "):]) if lines[1].startswith("prov ") else {}
    coords = np.zeros((n, d))
    weights = np.ones(n)
    keys = np.arange(n, dtype=np.int64)
    edges, lengths = [], []
    for ln in lines[2:]:
        t = ln.split()
        if not t:
            continue
        if t[0] == "v":
            i = int(t[1])
            coords[i] = [float(x) for x in t[2:2 + d]]
            weights[i] = float(t[2 + d])
            if has_keys:
                keys[i] = int(t[3 + d])
        elif t[0] == "e":
            edges.append((int(t[1]), int(t[2])))
            if has_len:
                lengths.append(float(t[3]))
    pts = PointSet(coords, float(meta["side"]), meta["metric"])
    return SpatialGraph(pts, weights, np.array(edges, dtype=np.int64).reshape(-1, 2),
                        np.array(lengths) if has_len else None, prov, keys)
