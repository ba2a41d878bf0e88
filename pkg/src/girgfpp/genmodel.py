"""Generators: GIRG (all connection-function choices), EGIRG windows and the
coupled ensemble, scale-free percolation and hyperbolic random graphs."""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

import numba
import numpy as np

from . import _engine as eng
from ._engine import ResourceCapError
from .dist import HrgInduced, VertexWeightModel, hrg_radius_from_uniform
from .graph import SpatialGraph
from .rng import derive_seed, keyed_uniform, stream
from .spatial import ContractError, CoupledEnsemble, PointSet, sample_coupled_ppp, xi

SALT_WEIGHT = 4
G_CHOICES = ("canonical", "lower-bound", "upper-bound", "threshold")
DEFAULT_MAX_EDGES = 50_000_000


class ParameterError(ValueError):
    pass


@dataclass(frozen=True)
class GirgParams:
    d: int = 1
    tau: float = 2.5
    alpha: float = 2.0
    a1_under: float = 1.0
    a1_over: float = 1.0
    a2: float = 1.0
    gamma: float = 0.5
    c1: float = 1.0
    C1: float = 1.0
    g_choice: str = "canonical"

    def __post_init__(self):
        if self.d < 1:
            raise ParameterError("d must be >= 1")
        if self.alpha <= 1:
            raise ParameterError("alpha must exceed 1")
        if not self.gamma < 1:
            raise ParameterError("gamma must be < 1")
        if not 0 < self.c1 <= self.C1:
            raise ParameterError("need 0 < c1 <= C1")
        if min(self.a1_under, self.a1_over, self.a2) <= 0:
            raise ParameterError("a1_under, a1_over, a2 must be positive")
        if self.g_choice not in G_CHOICES:
            raise ParameterError(f"g_choice must be one of {G_CHOICES}")
        if self.tau <= 1:
            raise ParameterError("tau must exceed 1")
        if not 2 < self.tau < 3:
            warnings.warn("tau outside (2,3): outside the headline regime", stacklevel=2)

    def kernel(self) -> tuple[int, np.ndarray]:
        if self.g_choice == "canonical":
            return eng.CANONICAL, np.array([self.a1_over, self.alpha, self.d], float)
        if self.g_choice == "lower-bound":
            return eng.LOWER, np.array([self.c1, self.a1_under, self.a2, self.gamma, self.alpha, self.d], float)
        if self.g_choice == "upper-bound":
            return eng.UPPER, np.array([self.C1, self.a1_over, self.alpha, self.d], float)
        return eng.THRESHOLD, np.array([self.a1_over, self.d], float)

    def with_choice(self, g_choice: str) -> "GirgParams":
        return GirgParams(**{**asdict(self), "g_choice": g_choice})


@dataclass(frozen=True)
class SfpParams:
    d: int = 2
    alpha_tilde: float = 3.0
    tau_tilde: float = 2.0
    lam: float = 1.0
    m: int = 10

    def __post_init__(self):
        if self.alpha_tilde <= self.d:
            raise ParameterError("alpha_tilde must exceed d")
        if self.tau_tilde <= 1 or self.lam <= 0 or self.m < 1:
            raise ParameterError("need tau_tilde > 1, lambda > 0, m >= 1")

    @property
    def gamma_sfp(self) -> float:
        return self.alpha_tilde * (self.tau_tilde - 1.0) / self.d

    @property
    def headline_regime(self) -> bool:
        return 1.0 < self.gamma_sfp < 2.0


@dataclass(frozen=True)
class HrgParams:
    alpha_H: float = 0.75
    C_H: float = 0.0
    T_H: float | None = None
    n: int = 1000

    def __post_init__(self):
        if not 0.5 < self.alpha_H < 1.0:
            raise ParameterError("alpha_H must lie in (1/2, 1)")
        if self.T_H is not None and self.T_H <= 0:
            raise ParameterError("T_H must be positive")
        if self.n < 2:
            raise ParameterError("n must be >= 2")

    @property
    def R(self) -> float:
        return 2.0 * math.log(self.n) + self.C_H

    @property
    def tau(self) -> float:
        return 2.0 * self.alpha_H + 1.0

    @property
    def alpha(self) -> float:
        return math.inf if self.T_H is None else 1.0 / self.T_H


# ---------------------------------------------------------------------------
# connection functions


def connection_prob(params: GirgParams, delta, w1: float, w2: float, n: int) -> float:
    """Connection probability for displacement ``delta`` on [-1/2,1/2]^d with n vertices."""
    if w1 < 1 or w2 < 1:
        raise ParameterError("weights must be >= 1")
    kind, kp = params.kernel()
    r = float(np.linalg.norm(np.atleast_1d(np.asarray(delta, float)))) * n ** (1.0 / params.d)
    return float(eng.kernel_prob(kind, kp, r, float(w1), float(w2), 1.0, 1.0))


def limit_h(params: GirgParams, Delta, w1: float, w2: float) -> float:
    """Limit connection function h(Delta, w1, w2) in blown-up coordinates."""
    kind, kp = params.kernel()
    r = float(np.linalg.norm(np.atleast_1d(np.asarray(Delta, float))))
    return float(eng.kernel_prob(kind, kp, r, float(w1), float(w2), 1.0, 1.0))


def _weights_for(model, seed: int, keys: np.ndarray) -> np.ndarray:
    if model is None:
        return np.ones(keys.size)
    if isinstance(model, VertexWeightModel):
        return np.asarray(model.from_uniform(keyed_uniform(seed, keys, salt=SALT_WEIGHT)), float)
    w = np.asarray(model, dtype=float)
    if w.shape != keys.shape:
        raise ContractError("explicit weights must have one entry per vertex")
    return w


def _prov(model: str, params, seed: int, **extra) -> dict:
    p = asdict(params) if hasattr(params, "__dataclass_fields__") else dict(params)
    return {"model": model, "params": p, "seed": int(seed), **extra}


# ---------------------------------------------------------------------------
# GIRG family


def generate_girg(params: GirgParams, n: int, weights=None, seed: int = 0, *,
                  naive: bool = False, max_edges: int = DEFAULT_MAX_EDGES,
                  positions: np.ndarray | None = None) -> SpatialGraph:
    """GIRG on [-1/2,1/2]^d. ``weights``: a VertexWeightModel, an explicit array, or None (all 1)."""
    if n < 2:
        raise ParameterError("n must be >= 2")
    if weights is None:
        weights = VertexWeightModel(params.tau)
    keys = np.arange(n, dtype=np.int64)
    if positions is None:
        positions = stream(seed, "positions", n, params.d).random((n, params.d)) - 0.5
    pts = PointSet(positions, 1.0, "box")
    w = _weights_for(weights, seed, keys)
    kind, kp = params.kernel()
    edges = eng.sample_edges(pts.coords + 0.5, w, np.zeros(n), keys, n ** (1.0 / params.d),
                             False, kind, kp, derive_seed(seed, "edges"), max_edges, naive)
    return SpatialGraph(pts, w, edges, None, _prov("girg", params, seed, n=n, naive=naive))


def _window_graph(params, pts: PointSet, w, keys, seed, naive, max_edges, model, **extra):
    kind, kp = params.kernel()
    unit = pts.coords / pts.side + 0.5
    edges = eng.sample_edges(unit, w, np.zeros(len(pts)), keys, pts.side, False, kind, kp,
                             derive_seed(seed, "edges"), max_edges, naive)
    return SpatialGraph(pts, w, edges, None, _prov(model, params, seed, **extra), keys)


def egirg_window_vertices(params: GirgParams, side: float, seed: int = 0, *, weights=None,
                          base_intensity: float | None = None):
    """Base PPP of the EGIRG window: (points, weights, keys, retention uniforms, base intensity)."""
    base_int = 1.0 + xi(3) if base_intensity is None else float(base_intensity)
    if weights is None:
        weights = VertexWeightModel(params.tau)
    rng = stream(seed, "egirg-window", repr(float(side)), params.d)
    count = int(rng.poisson(base_int * side ** params.d))
    pts = PointSet((rng.random((count, params.d)) - 0.5) * side, side, "box")
    keys = np.arange(count, dtype=np.int64)
    U = keyed_uniform(seed, keys, salt=3)
    return pts, _weights_for(weights, seed, keys), keys, U, base_int


def generate_egirg_window(params: GirgParams, lam: float, side: float, seed: int = 0, *,
                          weights=None, base_intensity: float | None = None, naive: bool = False,
                          max_edges: int = DEFAULT_MAX_EDGES) -> SpatialGraph:
    """EGIRG restricted to [-side/2, side/2]^d: PPP(lam) vertices and limit function h.

    A base PPP of ``base_intensity`` (default 1 + xi_3) is thinned with keyed
    uniforms, and edges are decided once on the base set, so graphs sharing a
    seed are nested in lam.
    """
    if lam <= 0:
        raise ParameterError("lambda must be positive")
    pts, w, keys, U, base_int = egirg_window_vertices(params, side, seed, weights=weights,
                                                      base_intensity=base_intensity)
    if lam > base_int:
        raise ParameterError("lambda exceeds the base intensity")
    base = _window_graph(params, pts, w, keys, seed, naive, max_edges, "egirg",
                         lam=lam, side=side, base_intensity=base_int)
    return base.induced(np.flatnonzero(U <= lam / base_int))


@dataclass(frozen=True, eq=False)
class CoupledGraphs:
    """The base graph on the 1 + xi_3 point set and views at other intensities."""

    ensemble: CoupledEnsemble
    base: SpatialGraph

    def at(self, lam: float) -> SpatialGraph:
        return self.base.induced(self.ensemble.retained(lam))

    def bgirg(self) -> SpatialGraph | None:
        ids = self.ensemble.bgirg_ids
        return None if ids is None else self.base.induced(ids)


def generate_coupled(params: GirgParams, n: int, seed: int = 0, *, weights=None,
                     naive: bool = False, max_edges: int = DEFAULT_MAX_EDGES) -> CoupledGraphs:
    """EGIRG on the volume-n box at intensity 1+xi_3; lower intensities and the
    BGIRG are induced subgraphs, hence nested by construction."""
    ens = sample_coupled_ppp(n, params.d, seed)
    if weights is None:
        weights = VertexWeightModel(params.tau)
    keys = np.arange(len(ens.base), dtype=np.int64)
    w = _weights_for(weights, seed, keys)
    g = _window_graph(params, ens.base, w, keys, seed, naive, max_edges, "egirg-coupled",
                      n=n, base_intensity=ens.base_intensity)
    return CoupledGraphs(ens, g)


# ---------------------------------------------------------------------------
# scale-free percolation


def generate_sfp(params: SfpParams, weights=None, seed: int = 0, *, max_vertices: int = 5_000_000,
                 max_edges: int = DEFAULT_MAX_EDGES, naive: bool = False) -> SpatialGraph:
    m, d = params.m, params.d
    count = (2 * m + 1) ** d
    if count > max_vertices:
        raise ResourceCapError(f"SFP window has {count} vertices, cap is {max_vertices}")
    axes = [np.arange(-m, m + 1)] * d
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d).astype(float)
    side = 2 * m + 1
    pts = PointSet(grid, float(side), "box")
    keys = np.arange(count, dtype=np.int64)
    if weights is None:
        weights = VertexWeightModel(params.tau_tilde)
    w = _weights_for(weights, seed, keys)
    unit = (grid + m + 0.5) / side
    kp = np.array([params.lam, params.alpha_tilde], float)
    edges = eng.sample_edges(unit, w, np.zeros(count), keys, float(side), False, eng.SFP, kp,
                             derive_seed(seed, "edges"), max_edges, naive)
    prov = _prov("sfp", params, seed, gamma_sfp=params.gamma_sfp, headline_regime=params.headline_regime)
    return SpatialGraph(pts, w, edges, None, prov)


def sfp_prob(params: SfpParams, dist: float, wu: float, wv: float) -> float:
    kp = np.array([params.lam, params.alpha_tilde], float)
    return float(eng.kernel_prob(eng.SFP, kp, float(dist), float(wu), float(wv), 1.0, 1.0))


# ---------------------------------------------------------------------------
# hyperbolic random graphs


def hyperbolic_distance(u, v) -> float:
    """Distance between polar points (phi, r) in the hyperbolic plane."""
    (pu, ru), (pv, rv) = u, v
    if ru < 0 or rv < 0:
        raise ParameterError("radii must be nonnegative")
    s = math.sin(0.5 * (pu - pv))
    x = math.cosh(ru - rv) + 2.0 * s * s * math.sinh(ru) * math.sinh(rv)
    if x < 1.0 - 1e-12:
        raise FloatingPointError("cosh argument below 1")
    return math.acosh(max(x, 1.0))


def hrg_prob(params: HrgParams, dh: float) -> float:
    if params.T_H is None:
        return 1.0 if dh <= params.R else 0.0
    z = (dh - params.R) / (2.0 * params.T_H)
    return 0.0 if z > 700 else 1.0 / (1.0 + math.exp(z))


def generate_hrg(params: HrgParams, seed: int = 0, *, naive: bool = False,
                 max_edges: int = DEFAULT_MAX_EDGES) -> SpatialGraph:
    n, R = params.n, params.R
    rng = stream(seed, "hrg", n)
    phi = rng.random(n) * 2.0 * math.pi
    r = hrg_radius_from_uniform(rng.random(n), params.alpha_H, R)
    w = np.maximum(np.exp((R - r) / 2.0), 1.0)
    pts = PointSet(phi - math.pi, 2.0 * math.pi, "torus")
    if params.T_H is None:
        kind, kp = eng.HRG_THRESHOLD, np.array([R], float)
    else:
        kind, kp = eng.HRG_TEMPERATURE, np.array([R, params.T_H], float)
    keys = np.arange(n, dtype=np.int64)
    edges = eng.sample_edges((phi / (2.0 * math.pi)).reshape(-1, 1) % 1.0, w, r, keys, 2.0 * math.pi,
                             True, kind, kp, derive_seed(seed, "edges"), max_edges, naive)
    prov = _prov("hrg", params, seed, R=R, phi=phi, r=r)
    return SpatialGraph(pts, w, edges, None, prov)


def hrg_to_girg(g: SpatialGraph) -> SpatialGraph:
    """Map (phi, r) to x = (phi - pi)/(2 pi) on the unit circle and W = e^{(R - r)/2}."""
    prov = g.provenance
    if prov.get("model") != "hrg":
        raise ContractError("hrg_to_girg needs a graph generated by generate_hrg")
    phi = np.asarray(prov["phi"], float)
    r = np.asarray(prov["r"], float)
    R = float(prov["R"])
    x = (phi - math.pi) / (2.0 * math.pi)
    w = np.maximum(np.exp((R - r) / 2.0), 1.0)
    new_prov = {k: v for k, v in prov.items() if k not in ("phi", "r")}
    new_prov["model"] = "hrg-as-girg"
    return SpatialGraph(PointSet(x, 1.0, "torus"), w, g.edges, g.lengths, new_prov, g.keys)


def hrg_limit_h(delta: float, w1: float, w2: float, C_H: float, T_H: float | None = None) -> float:
    if delta < 0 or w1 < 1 or w2 < 1:
        raise ParameterError("need delta >= 0 and weights >= 1")
    if T_H is None:
        return 1.0 if delta <= math.exp(-C_H / 2.0) * w1 * w2 / math.pi else 0.0
    if delta == 0:
        return 1.0
    z = math.exp(C_H / 2.0) * delta * math.pi / (w1 * w2)
    return 1.0 / (1.0 + z ** (1.0 / T_H))


def beta_window(alpha: float) -> float:
    return 1.0 / (3.0 * (2.0 - alpha) + 2.0) if alpha < 2 else 1.0 / alpha


def _hrg_exact(params: HrgParams, Delta, w1, w2):
    """p_H^{(n)} for vertices whose GIRG images are Delta/n apart with weights w1, w2."""
    R, n = params.R, params.n
    ru, rv = R - 2.0 * np.log(w1), R - 2.0 * np.log(w2)
    s = np.sin(np.pi * np.asarray(Delta) / n)
    x = np.cosh(ru - rv) + 2.0 * s * s * np.sinh(ru) * np.sinh(rv)
    dh = np.arccosh(np.maximum(x, 1.0))
    if params.T_H is None:
        return (dh <= R).astype(float)
    return 1.0 / (1.0 + np.exp(np.minimum((dh - R) / (2.0 * params.T_H), 700.0)))


@dataclass(frozen=True)
class LimitReport:
    n: int
    variant: str
    samples: int
    max_error: float
    constant: float  # max_error * n
    errors: np.ndarray

    def passes(self, C: float) -> bool:
        return self.max_error <= C / self.n


def verify_limit_convergence(params: HrgParams, samples: int = 2000, seed: int = 0) -> LimitReport:
    """Compare p_H^{(n)} with its limit on the admissibility windows.

    Temperature: relative error |p - h|/h over Delta in [n^-b, n^b], w in [1, n^b].
    Threshold: for w in [1, n^{1/2}] with limit boundary inside [n^-1/2, n^1/2],
    the gap between the exact and limit boundaries in units of w1 w2.
    """
    n = params.n
    rng = stream(seed, "limit-check", n)
    if params.T_H is not None:
        b = beta_window(params.alpha)
        lo, hi = -b * math.log(n), b * math.log(n)
        Delta = np.exp(rng.uniform(lo, hi, samples))
        w1 = np.exp(rng.uniform(0.0, hi, samples))
        w2 = np.exp(rng.uniform(0.0, hi, samples))
        p = _hrg_exact(params, Delta, w1, w2)
        z = np.exp(params.C_H / 2.0) * Delta * np.pi / (w1 * w2)
        h = 1.0 / (1.0 + z ** (1.0 / params.T_H))
        err = np.abs(p - h) / h
        return LimitReport(n, "temperature", samples, float(err.max()), float(err.max() * n), err)
    R = params.R
    out = []
    half = 0.5 * math.log(n)
    while len(out) < samples:
        w1, w2 = np.exp(rng.uniform(0.0, half, 2))
        limit = math.exp(-params.C_H / 2.0) * w1 * w2 / math.pi
        if not n ** -0.5 <= limit <= n ** 0.5:
            continue
        ru, rv = R - 2.0 * math.log(w1), R - 2.0 * math.log(w2)
        v = (math.cosh(R) - math.cosh(ru - rv)) / (2.0 * math.sinh(ru) * math.sinh(rv))
        exact = n * 2.0 * math.asin(math.sqrt(min(1.0, max(v, 0.0)))) / (2.0 * math.pi)
        out.append(abs(exact - limit) / (w1 * w2))
    err = np.array(out)
    return LimitReport(n, "threshold", samples, float(err.max()), float(err.max() * n), err)


def hrg_weight_band(C_H: float, alpha_H: float) -> tuple[float, float]:
    return 0.5, 2.0 + 6.0 * math.exp(-C_H * alpha_H / 2.0)


# ---------------------------------------------------------------------------
# components


@numba.njit(cache=True)
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@numba.njit(cache=True)
def _union_find_labels(n, edges):
    parent = np.arange(n)
    for i in range(edges.shape[0]):
        a = _find(parent, edges[i, 0])
        b = _find(parent, edges[i, 1])
        if a != b:
            # the smaller id becomes the root, so roots are component minima
            if a < b:
                parent[b] = a
            else:
                parent[a] = b
    labels = np.empty(n, dtype=np.int64)
    for v in range(n):
        labels[v] = _find(parent, v)
    return labels


@dataclass(frozen=True, eq=False)
class Components:
    labels: np.ndarray  # component label = smallest vertex id in the component
    giant: int
    sizes: dict

    @property
    def giant_ids(self) -> np.ndarray:
        return np.flatnonzero(self.labels == self.giant)


def giant_component(g: SpatialGraph) -> Components:
    labels = _union_find_labels(g.n, np.ascontiguousarray(g.edges)) if g.n else np.zeros(0, np.int64)
    if g.n == 0:
        return Components(labels, -1, {})
    roots, counts = np.unique(labels, return_counts=True)
    best = int(roots[np.lexsort((roots, -counts))[0]])
    return Components(labels, best, dict(zip(roots.tolist(), counts.tolist())))


def hrg_weight_model(params: HrgParams) -> VertexWeightModel:
    return VertexWeightModel.hrg(params.alpha_H, params.C_H, params.n)

