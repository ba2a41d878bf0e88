"""Bernoulli branching random walk on a Poisson environment.

Generations are stored as occupation counts per environment point. The
domination coupling identifies, in every generation, one *tracking*
individual per newly reached location; tracking individuals reuse the edge
coin U_xy of the upper EGIRG for pairs no tracking individual has examined
yet, every other offspring trial draws a fresh coin. Each trial therefore
sees an unused independent uniform, so the law of the walk is unchanged,
and tracking locations coincide with the BFS layers of the coupled graph.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numba
import numpy as np

from . import _engine as eng
from .genmodel import GirgParams, ParameterError, egirg_window_vertices
from .graph import SpatialGraph
from .rng import SALT_EDGE, derive_seed, keyed_uniform, stream
from .spatial import ContractError, PointSet


@dataclass(frozen=True, eq=False)
class BrwEnvironment:
    points: PointSet
    weights: np.ndarray
    keys: np.ndarray

    @classmethod
    def from_graph(cls, g: SpatialGraph) -> "BrwEnvironment":
        return cls(g.points, g.weights, g.keys)

    def __len__(self) -> int:
        return len(self.points)

    def same_as(self, g: SpatialGraph) -> bool:
        return (len(g.points) == len(self.points) and np.array_equal(g.coords, self.points.coords)
                and np.array_equal(g.weights, self.weights) and np.array_equal(g.keys, self.keys))


def brw_environment(params: GirgParams, lam: float, side: float, seed: int, weights=None) -> BrwEnvironment:
    """Vertex set of the EGIRG window at intensity lam (same points, weights and keys)."""
    pts, w, keys, U, base_int = egirg_window_vertices(params, side, seed, weights=weights)
    if not 0 < lam <= base_int:
        raise ParameterError("lambda must lie in (0, base intensity]")
    keep = np.flatnonzero(U <= lam / base_int)
    return BrwEnvironment(PointSet(pts.coords[keep], side, "box"), w[keep], keys[keep])


@numba.njit(cache=True)
def _row_probs(kind, kp, pos, w, x):
    n = pos.shape[0]
    out = np.zeros(n)
    for y in range(n):
        if y == x:
            continue
        s = 0.0
        for i in range(pos.shape[1]):
            t = pos[x, i] - pos[y, i]
            s += t * t
        out[y] = eng.kernel_prob(kind, kp, math.sqrt(s), w[x], w[y], 1.0, 1.0)
    return out


def child_probabilities(env: BrwEnvironment, params: GirgParams) -> "callable":
    kind, kp = params.with_choice("upper-bound").kernel()
    pos = np.ascontiguousarray(env.points.coords, float)
    w = np.ascontiguousarray(env.weights, float)
    cache: dict[int, np.ndarray] = {}

    def row(x: int) -> np.ndarray:
        r = cache.get(x)
        if r is None:
            r = cache[x] = _row_probs(kind, kp, pos, w, int(x))
        return r

    return row


@dataclass
class BrwRun:
    env: BrwEnvironment
    root: int
    generations: list  # list of (locations, counts), sorted by location
    cap: int
    truncated: bool = False
    tracking: list = field(default_factory=list)  # per generation tracking locations (coupled runs)

    def sizes(self) -> list[int]:
        return [int(c.sum()) for _, c in self.generations]

    def max_displacements(self) -> list[float]:
        x0 = self.env.points.coords[self.root]
        out = []
        for loc, _ in self.generations:
            if loc.size == 0:
                out.append(0.0)
            else:
                out.append(float(np.max(np.linalg.norm(self.env.points.coords[loc] - x0, axis=1))))
        return out

    def summary(self) -> list[dict]:
        return [{"k": k, "size": s, "max_displacement": m}
                for k, (s, m) in enumerate(zip(self.sizes(), self.max_displacements()))]

    def to_json(self) -> str:
        return json.dumps({"root": self.root, "truncated": self.truncated, "generations": self.summary()})


def _run(env, root, max_gen, cap, params, seed, coupled, coin):
    n = len(env)
    if not 0 <= root < n:
        raise ContractError("root must be an environment point")
    if cap < 1:
        raise ValueError("cap must be >= 1")
    row = child_probabilities(env, params)
    rng = stream(seed, "brw", int(env.keys[root]))
    edge_seed = derive_seed(seed, "edges")
    keys = env.keys
    if coin is None:
        def coin(x, ys):
            return keyed_uniform(edge_seed, np.full(ys.size, keys[x]), keys[ys], salt=SALT_EDGE)

    counts = np.zeros(n, dtype=np.int64)
    counts[root] = 1
    gens = [(np.array([root]), np.array([1]))]
    visited = np.zeros(n, dtype=bool)
    visited[root] = True
    track = np.array([root]) if coupled else np.zeros(0, dtype=np.int64)
    tracks = [track]
    truncated = False
    for _ in range(max_gen):
        nxt = np.zeros(n, dtype=np.int64)
        new_track = np.zeros(n, dtype=bool)
        is_track = np.zeros(n, dtype=bool)
        is_track[track] = True
        done_track = np.zeros(n, dtype=bool)  # trackers of this generation already processed
        for x in np.flatnonzero(counts):
            p = row(x)
            c = int(counts[x])
            if is_track[x]:
                # pairs {x, y} are unexamined iff y was never a tracker before x
                fresh_pair = ~visited | (is_track & ~done_track)
                fresh_pair[x] = False
                ys = np.flatnonzero(fresh_pair & (p > 0))
                hit = np.zeros(n, dtype=bool)
                if ys.size:
                    hit[ys] = np.asarray(coin(x, ys)) <= p[ys]
                other = np.flatnonzero(~fresh_pair & (p > 0))
                other = other[other != x]
                if other.size:
                    hit[other] = rng.random(other.size) <= p[other]
                nxt += hit
                new_track |= hit & ~visited
                done_track[x] = True
                c -= 1
            if c > 0:
                nxt += rng.binomial(c, p)
            if nxt.sum() > cap:
                truncated = True
                break
        if truncated:
            break
        counts = nxt
        loc = np.flatnonzero(counts)
        gens.append((loc, counts[loc]))
        if coupled:
            track = np.flatnonzero(new_track)
            visited[track] = True
            tracks.append(track)
        if loc.size == 0:
            break
    return BrwRun(env, root, gens, cap, truncated, tracks if coupled else [])


def simulate_berbrw(env: BrwEnvironment, root: int, max_gen: int, cap: int, params: GirgParams,
                    seed: int) -> BrwRun:
    """BerBRW with child probability given by the upper kernel; every trial uses a fresh coin."""
    return _run(env, root, max_gen, cap, params, seed, coupled=False, coin=None)


def simulate_coupled(env: BrwEnvironment, root: int, max_gen: int, cap: int, params: GirgParams,
                     seed: int, coin=None) -> BrwRun:
    """BerBRW whose tracking individuals reuse the keyed edge coins of the upper EGIRG."""
    return _run(env, root, max_gen, cap, params, seed, coupled=True, coin=coin)


def upper_graph(env: BrwEnvironment, params: GirgParams, seed: int) -> SpatialGraph:
    """Upper EGIRG on the environment: edge {x,y} iff U_xy <= upper kernel, coins keyed by vertex keys."""
    kind, kp = params.with_choice("upper-bound").kernel()
    side = env.points.side
    unit = env.points.coords / side + 0.5
    edges = eng.sample_edges(unit, env.weights, np.zeros(len(env)), env.keys, side, False, kind, kp,
                             derive_seed(seed, "edges"), 50_000_000, True)
    return SpatialGraph(env.points, env.weights, edges, None, {"model": "egirg-upper", "seed": int(seed)},
                        env.keys)


def domination_check(env: BrwEnvironment, seed: int, v: int, k: int, params: GirgParams,
                     graph: SpatialGraph | None = None, coin=None, cap: int = 1_000_000) -> bool:
    """True iff every graph layer j <= k around v lies in generation j of the coupled walk.

    ``graph`` defaults to the upper EGIRG built from the same keyed coins;
    when ``coin`` overrides the edge coins, pass the matching graph.
    """
    if graph is None:
        graph = upper_graph(env, params, seed)
    elif not env.same_as(graph):
        raise ContractError("graph and walk environments differ")
    if k == 0:
        return True
    from .fpp import graph_layers

    depth = graph_layers(graph, v, k)
    run = simulate_coupled(env, v, k, cap, params, seed, coin=coin)
    if run.truncated:
        raise RuntimeError("walk hit the cap before generation k")
    for j in range(1, k + 1):
        layer = np.flatnonzero(depth == j)
        loc = run.generations[j][0] if j < len(run.generations) else np.zeros(0, dtype=np.int64)
        if not np.isin(layer, loc).all():
            return False
    return True


# ---------------------------------------------------------------------------
# growth envelopes


def zeta_min(epsilon: float, tau: float, alpha: float, d: int) -> float:
    return max(2 * (epsilon / (1 + epsilon) + (tau - 1) / (tau - 2)) / d,
               (2 * alpha + epsilon * (tau - 2) / (1 + epsilon)) / ((alpha - 1) * d))


@dataclass(frozen=True)
class GrowthEnvelope:
    epsilon: float
    i: int
    zeta: float
    tau: float

    def base(self) -> float:
        return (1 + self.epsilon) / (self.tau - 2)

    def c(self, k: int) -> float:
        return 2.0 * math.exp(self.i * (1 + self.epsilon) * self.base() ** k)

    def S(self, k: int) -> float:
        return math.exp(self.i * self.zeta * self.base() ** k)


def make_envelope(epsilon: float, i: int, tau: float, alpha: float, d: int, zeta: float | None = None):
    zmin = zeta_min(epsilon, tau, alpha, d)
    z = zmin if zeta is None else zeta
    if z < zmin:
        raise ParameterError(f"zeta must be >= {zmin}")
    return GrowthEnvelope(epsilon, i, z, tau)


@dataclass
class EnvelopeResult:
    i: int | None
    failures: dict  # i -> first failing k


def envelope_check(run: BrwRun, epsilon: float, tau: float, alpha: float, d: int,
                   zeta: float | None = None, i_max: int = 50) -> EnvelopeResult:
    """Smallest i with Z_k <= c_k(eps,i) and displacement <= S_k(eps,i) for all simulated k."""
    sizes, disp = run.sizes(), run.max_displacements()
    failures = {}
    for i in range(1, i_max + 1):
        env = make_envelope(epsilon, i, tau, alpha, d, zeta)
        bad = next((k for k in range(len(sizes)) if sizes[k] > env.c(k) or disp[k] > env.S(k)), None)
        if bad is None:
            return EnvelopeResult(i, failures)
        failures[i] = bad
    return EnvelopeResult(None, failures)


def rank1_constant(params: GirgParams, lam: float) -> float:
    """c_lam with sum_y p(x,y) <= c_lam w_x w_y integrated: lam C1 a1^{1/alpha} V_d alpha/(alpha-1)."""
    d, a = params.d, params.alpha
    vd = math.pi ** (d / 2) / math.gamma(d / 2 + 1)
    return lam * params.C1 * params.a1_over ** (1 / a) * vd * a / (a - 1)


def rank1_bound(params: GirgParams, lam: float, EW: float, EW2: float, k: int) -> float:
    """(c_lam E[W^2])^k E[W] / E[W^2]: mean generation-k size from a root of weight 1.

    Exact for the rank-1 kernel min(1, a (w_x w_y)^alpha r^{-alpha d}) on all of R^d;
    a root of weight w multiplies it by w.
    """
    c = rank1_constant(params, lam)
    return (c * EW2) ** k * EW / EW2
