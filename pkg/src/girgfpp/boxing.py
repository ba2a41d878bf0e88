"""Doubly-exponential boxing systems, event checks, greedy centre paths and bridges."""
from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .dist import EdgeLengthDistribution
from .graph import SpatialGraph
from .spatial import ContractError, blow_up


class BoxingParameterError(ValueError):
    pass


@dataclass(frozen=True)
class BoxingConstants:
    epsilon: float
    tau: float
    delta: float
    C: float
    D: float


def boxing_constants(epsilon: float = 0.1, tau: float = 2.5) -> BoxingConstants:
    if not 2 < tau < 3:
        raise BoxingParameterError("tau must lie in (2,3)")
    if not 0 < epsilon < 1:
        raise BoxingParameterError("epsilon must lie in (0,1)")
    delta = (tau - 2) * epsilon / (2 * (tau - 1))
    C = (1 - epsilon) / (tau - 2)
    D = (1 - delta) * (1 - epsilon / (tau - 1)) / (1 - epsilon) - delta / 2
    if C <= 1:
        raise BoxingParameterError(f"C = {C} <= 1; need epsilon < 3 - tau")
    if D < 1:
        raise BoxingParameterError(f"D = {D} < 1")
    return BoxingConstants(epsilon, tau, delta, C, D)


def radii(mu: float, k: int, consts: BoxingConstants, d: int) -> tuple[float, float]:
    """(D_k, R_k) = (mu^{D C^k / d}, mu^{C^k / d})."""
    ck = consts.C ** k
    return mu ** (consts.D * ck / d), mu ** (ck / d)


# ---------------------------------------------------------------------------
# geometry


def _box_vol(lo, hi) -> float:
    return float(np.prod(np.clip(np.asarray(hi) - np.asarray(lo), 0.0, None)))


def _inter(alo, ahi, blo, bhi):
    return np.maximum(alo, blo), np.minimum(ahi, bhi)


@dataclass
class Subbox:
    lo: np.ndarray
    hi: np.ndarray
    members: np.ndarray
    centre: int  # -1 when empty
    window_fraction: float


@dataclass
class Annulus:
    k: int
    Dk: float
    Rk: float
    outer: tuple  # (lo, hi) of the outer box
    holes: list  # list of (lo, hi) boxes removed from the outer box
    cell_side: float
    subboxes: list = field(default_factory=list)

    @property
    def bk(self) -> int:
        return len(self.subboxes)

    @property
    def centres(self) -> np.ndarray:
        return np.array([s.centre for s in self.subboxes if s.centre >= 0], dtype=np.int64)

    @property
    def empty_fraction(self) -> float:
        if not self.subboxes:
            return 0.0
        return sum(s.centre < 0 for s in self.subboxes) / len(self.subboxes)


@dataclass
class BoxingSystem:
    center: np.ndarray
    mu: float
    d: int
    constants: BoxingConstants
    volume: float
    annuli: list
    graph_fp: str

    @property
    def k_max(self) -> int:
        return len(self.annuli) - 1


def graph_fingerprint(g: SpatialGraph) -> str:
    h = hashlib.sha1()
    for arr in (g.edges, g.coords, g.weights):
        h.update(np.ascontiguousarray(arr).tobytes())
    return h.hexdigest()


def blown_up_graph(g: SpatialGraph) -> SpatialGraph:
    """Rescale a unit-window graph to unit vertex density (side n^{1/d})."""
    return SpatialGraph(blow_up(g.points, g.n), g.weights, g.edges, g.lengths, dict(g.provenance), g.keys)


def _in_box(x, lo, hi):
    return np.all((x >= lo) & (x <= hi), axis=1)


def _tile(g: SpatialGraph, outer, holes, side_target: float, win_lo, win_hi, candidates=None):
    """Tile outer minus holes with a grid of floor(width / side_target) cells per axis."""
    lo, hi = outer
    width = hi - lo
    m = np.maximum(1, np.floor(width / side_target + 1e-12).astype(int))
    if np.prod(m.astype(float)) > 1e6:
        raise BoxingParameterError("too many subboxes")
    cell = width / m
    x = g.coords if candidates is None else g.coords[candidates]
    ids = np.arange(g.n) if candidates is None else np.asarray(candidates)
    inside = _in_box(x, lo, hi)
    for hlo, hhi in holes:
        inside &= ~_in_box(x, hlo, hhi)
    ids, x = ids[inside], x[inside]
    cidx = np.clip(np.floor((x - lo) / cell).astype(int), 0, m - 1)
    flat = np.ravel_multi_index(cidx.T, m) if ids.size else np.zeros(0, int)
    order = np.lexsort((ids, flat))
    ids_sorted, flat_sorted = ids[order], flat[order]
    subs = []
    for c in itertools.product(*[range(k) for k in m]):
        clo = lo + np.array(c) * cell
        chi = clo + cell
        vol = _box_vol(clo, chi)
        hole_vol = 0.0
        for hlo, hhi in holes:
            hole_vol += _box_vol(*_inter(clo, chi, hlo, hhi))
        region = vol - hole_vol
        if region <= 1e-12 * vol:
            continue  # cell lies inside a hole
        wlo, whi = _inter(clo, chi, win_lo, win_hi)
        in_win = _box_vol(wlo, whi)
        for hlo, hhi in holes:
            in_win -= _box_vol(*_inter(wlo, whi, hlo, hhi))
        frac = in_win / region
        if frac < 0.5:
            continue
        key = np.ravel_multi_index(np.array(c).reshape(-1, 1), m)[0]
        a, b = np.searchsorted(flat_sorted, key, "left"), np.searchsorted(flat_sorted, key, "right")
        members = ids_sorted[a:b]
        if members.size:
            w = g.weights[members]
            centre = int(members[np.flatnonzero(w == w.max())[0]])  # members sorted by id
        else:
            centre = -1
        subs.append(Subbox(clo, chi, members, centre, float(frac)))
    return float(cell[0]), subs


def _window(g: SpatialGraph, window):
    d = g.d
    s = g.points.side if window is None else float(window)
    return np.full(d, -s / 2), np.full(d, s / 2), s ** d


def _system_from_sizes(g, center, sizes, mu, consts, window, fp=None) -> BoxingSystem:
    win_lo, win_hi, vol = _window(g, window)
    center = np.asarray(center, float).reshape(-1)
    annuli = []
    prev = None
    for k, (Dk, Rk) in enumerate(sizes):
        outer = (center - Dk / 2, center + Dk / 2)
        holes = [] if prev is None else [prev]
        cell, subs = _tile(g, outer, holes, Rk, win_lo, win_hi)
        annuli.append(Annulus(k, Dk, Rk, outer, holes, cell, subs))
        prev = outer
    return BoxingSystem(center, mu, g.d, consts, vol, annuli, fp or graph_fingerprint(g))


def build_boxing(g: SpatialGraph, center, mu: float, constants: BoxingConstants,
                 window: float | None = None) -> BoxingSystem:
    """Annuli Gamma_k = Box_k minus Box_{k-1} (infinity norm) for k = 0..k_max."""
    if mu <= 1:
        raise BoxingParameterError("mu must exceed 1")
    win_lo, win_hi, vol = _window(g, window)
    c = np.asarray(center, float).reshape(-1)
    if c.size != g.d or np.any(c < win_lo) or np.any(c > win_hi):
        raise BoxingParameterError("center must lie in the window")
    sizes = []
    k = 0
    while True:
        Dk, Rk = radii(mu, k, constants, g.d)
        if Dk ** g.d > vol:
            break
        sizes.append((Dk, Rk))
        k += 1
    if len(sizes) < 2:
        raise BoxingParameterError("k_max < 1: window too small for this mu")
    return _system_from_sizes(g, c, sizes, mu, constants, window)


# ---------------------------------------------------------------------------
# events


@dataclass
class AnnulusEvents:
    k: int
    f1: bool
    f2: bool
    weight_band: tuple
    n_threshold: float
    N_same: dict
    N_next: dict
    min_N: int
    empty_fraction: float


def _adjacent_count(g: SpatialGraph, v: int, targets: set) -> int:
    return sum(1 for u in g.neighbors(v).tolist() if u in targets)


def verify_events(g: SpatialGraph, system: BoxingSystem, delta: float | None = None) -> list[AnnulusEvents]:
    cs = system.constants
    delta = cs.delta if delta is None else delta
    out = []
    for ann in system.annuli:
        k = ann.k
        ck = cs.C ** k
        lo = system.mu ** (ck * (1 - delta) / (cs.tau - 1))
        hi = system.mu ** (ck * (1 + delta) / (cs.tau - 1))
        centres = ann.centres
        w = g.weights[centres]
        f1 = bool(centres.size) and bool(np.all((w >= lo) & (w <= hi)))
        thr = math.exp(ck * (cs.D - 1) * math.log(system.mu) / 2) / 2
        same = set(centres.tolist())
        nxt = set(system.annuli[k + 1].centres.tolist()) if k + 1 < len(system.annuli) else None
        N_same, N_next = {}, {}
        for c in centres.tolist():
            N_same[c] = _adjacent_count(g, c, same - {c})
            if nxt is not None:
                N_next[c] = _adjacent_count(g, c, nxt)
        counts = list(N_same.values()) + list(N_next.values())
        min_N = min(counts) if counts else 0
        f2 = bool(centres.size) and all(N_same[c] >= thr for c in N_same) and all(
            N_next[c] >= thr for c in N_next)
        out.append(AnnulusEvents(k, f1, f2, (lo, hi), thr, N_same, N_next, min_N, ann.empty_fraction))
    return out


# ---------------------------------------------------------------------------
# greedy path


@dataclass
class GreedyPath:
    path: list
    total_length: float
    truncated: bool
    step_lengths: list


def _best_edge(g: SpatialGraph, v: int, targets: np.ndarray):
    """(length, target) of the shortest edge from v into ``targets``; ties by id."""
    if targets.size == 0:
        return None
    nb = g.neighbors(v)
    ip = g.csr[0]
    eids = g.csr[2][ip[v]:ip[v + 1]]
    hit = np.isin(nb, targets)
    if not hit.any():
        return None
    cand_len = g.lengths[eids[hit]]
    cand = nb[hit]
    j = np.lexsort((cand, cand_len))[0]
    return float(cand_len[j]), int(cand[j])


def start_vertex(g: SpatialGraph, system: BoxingSystem) -> int:
    c0 = system.annuli[0].centres
    if c0.size == 0:
        return -1
    w = g.weights[c0]
    return int(np.min(c0[w == w.max()]))


def greedy_centre_path(g: SpatialGraph, system: BoxingSystem) -> GreedyPath:
    if g.lengths is None:
        raise ContractError("greedy path needs edge lengths")
    v = start_vertex(g, system)
    if v < 0:
        return GreedyPath([], math.inf, True, [])
    path, steps = [v], []
    for ann in system.annuli[1:]:
        best = _best_edge(g, v, ann.centres)
        if best is None:
            return GreedyPath(path, float(sum(steps)), True, steps)
        steps.append(best[0])
        v = best[1]
        path.append(v)
    return GreedyPath(path, float(sum(steps)), False, steps)


def boxing_report(g: SpatialGraph, system: BoxingSystem) -> list[dict]:
    """Per-annulus records {k, Dk, Rk, bk, f1, min_N, f2, truncated}."""
    ev = verify_events(g, system)
    truncated_from = len(system.annuli)
    if g.lengths is not None:
        gp = greedy_centre_path(g, system)
        if gp.truncated:
            truncated_from = len(gp.path)
    rows = []
    for ann, e in zip(system.annuli, ev):
        rows.append({"k": ann.k, "Dk": ann.Dk, "Rk": ann.Rk, "bk": ann.bk, "f1": e.f1,
                     "min_N": e.min_N, "f2": e.f2, "truncated": ann.k >= truncated_from})
    return rows


# ---------------------------------------------------------------------------
# path-length bound


def epsilon_k_bound(dist: EdgeLengthDistribution, K: float, constants: BoxingConstants,
                    gamma_tilde: float, c: float, max_terms: int = 10_000) -> float:
    """3 sum_k F^{-1}(exp(-s C^{g k} ((1-delta)/(tau-1) ln K)^g)) with g = gamma_tilde.

    s = min(1, c (1 + C^g)). When c (1 + C^g) >= 1 (the usual case) this is the
    series as stated; a smaller c weakens the exponent so the series still
    dominates per-step thresholds between centres of consecutive annuli.
    """
    if K <= 1:
        return math.inf
    if dist.lower > 0:
        return math.inf
    g = gamma_tilde
    cs = constants
    s = min(1.0, c * (1.0 + cs.C ** g))
    b = ((1 - cs.delta) / (cs.tau - 1) * math.log(K)) ** g
    total = 0.0
    for k in range(max_terms):
        expo = s * cs.C ** (g * k) * b
        q = math.exp(-expo) if expo < 745 else 0.0
        term = float(dist.quantile_closed(q))
        if not math.isfinite(term):
            return math.inf
        total += term
        if term == 0.0 or (term < 1e-18 * max(total, 1e-300)):
            break
    else:
        return math.inf
    return 3.0 * total


def certified_K(g: SpatialGraph, path: list, constants: BoxingConstants) -> float:
    """Largest K with w(path[k]) >= K^{(1-delta) C^k / (tau-1)} for every k on the path."""
    cs = constants
    best = math.inf
    for k, v in enumerate(path):
        e = (1 - cs.delta) * cs.C ** k / (cs.tau - 1)
        best = min(best, g.weights[v] ** (1.0 / e))
    return best


def step_bound(dist: EdgeLengthDistribution, K: float, constants: BoxingConstants, gamma_tilde: float,
               c: float, k: int) -> float:
    """F^{-1}(exp(-c a_k^g - c a_{k+1}^g)) with a_j = (1-delta) C^j ln K / (tau-1)."""
    cs = constants
    a = lambda j: (1 - cs.delta) * cs.C ** j * math.log(K) / (cs.tau - 1)
    expo = c * (a(k) ** gamma_tilde + a(k + 1) ** gamma_tilde)
    return float(dist.quantile_closed(math.exp(-expo) if expo < 745 else 0.0))


# ---------------------------------------------------------------------------
# bridging two systems


@dataclass
class BridgeResult:
    path: list | None
    total_length: float
    k_star: int
    r: int
    connection_edges: int | None
    merged: Annulus | None = None


def _raw_r(mu1: float, mu2: float, C: float) -> int:
    return math.ceil((math.log(math.log(mu2)) - math.log(math.log(mu1))) / math.log(C) - 1e-12)


def modify_point(mu1: float, mu2: float, C: float) -> int:
    """r = ceil((ln ln mu2 - ln ln mu1) / ln C), at least 1."""
    return max(1, _raw_r(mu1, mu2, C))


def _greedy_through(g, start, annuli):
    path, total = [start], 0.0
    v = start
    for ann in annuli:
        best = _best_edge(g, v, ann.centres)
        if best is None:
            return path, total, False
        total += best[0]
        v = best[1]
        path.append(v)
    return path, total, True


def bridge_systems(g: SpatialGraph, sysA: BoxingSystem, sysB: BoxingSystem) -> BridgeResult:
    if sysA.graph_fp != sysB.graph_fp or sysA.graph_fp != graph_fingerprint(g):
        raise ContractError("systems must be built over the same graph")
    if g.lengths is None:
        raise ContractError("bridging needs edge lengths")
    if sysA.mu > sysB.mu:
        raise ValueError("need sysA.mu <= sysB.mu")
    cs, d = sysA.constants, g.d
    mu1, mu2 = sysA.mu, sysB.mu
    r = modify_point(mu1, mu2, cs.C)
    shift = _raw_r(mu1, mu2, cs.C)  # annulus k >= r of A uses index k - shift of base mu2
    vA, vB = sysA.center, sysB.center
    sep = float(np.linalg.norm(vA - vB))
    k_star = -1
    while radii(mu2, k_star + 1, cs, d)[0] < sep / (2 * math.sqrt(d)):
        k_star += 1
        if k_star > 64:
            break
    k_star = max(k_star, 0)  # boxes already overlap at level 0
    # system A: first r annuli with base mu1, then base mu2; system B unchanged
    sizes_A = [radii(mu1, k, cs, d) for k in range(r)] + [
        radii(mu2, k - shift, cs, d) for k in range(r, shift + k_star + 1)]
    sizes_B = [radii(mu2, j, cs, d) for j in range(k_star + 1)]
    modA = _system_from_sizes(g, vA, sizes_A, mu1, cs, None, sysA.graph_fp)
    modB = _system_from_sizes(g, vB, sizes_B, mu2, cs, None, sysB.graph_fp)
    # merged annulus around the midpoint, large enough to hold both inner boxes
    boxA = modA.annuli[-1].outer
    boxB = modB.annuli[-1].outer
    mid = (vA + vB) / 2
    D_m = ((math.sqrt(d) / 2 + 1) * mu2 ** (cs.D * cs.C ** (k_star + 1))) ** (1.0 / d)
    need = 2 * float(np.max(np.abs(np.concatenate([boxA[0], boxA[1], boxB[0], boxB[1]]).reshape(-1, d) - mid)))
    D_m = max(D_m, need)
    R_m = mu2 ** (cs.C ** (k_star + 1) / d)
    win_lo, win_hi, _ = _window(g, None)
    outer = (mid - D_m / 2, mid + D_m / 2)
    cell, subs = _tile(g, outer, [boxA, boxB], R_m, win_lo, win_hi)
    merged = Annulus(k_star + 1, D_m, R_m, outer, [boxA, boxB], cell, subs)
    sA, sB = start_vertex(g, modA), start_vertex(g, modB)
    if sA < 0 or sB < 0:
        return BridgeResult(None, math.inf, k_star, r, None, merged)
    pA, lA, okA = _greedy_through(g, sA, modA.annuli[1:] + [merged])
    pB, lB, okB = _greedy_through(g, sB, modB.annuli[1:] + [merged])
    if not (okA and okB):
        return BridgeResult(None, math.inf, k_star, r, None, merged)
    a, b = pA[-1], pB[-1]
    if a == b:
        return BridgeResult(pA + pB[::-1][1:], lA + lB, k_star, r, 0, merged)
    e = g.edge_index(a, b)
    if e >= 0:
        return BridgeResult(pA + pB[::-1], lA + lB + float(g.lengths[e]), k_star, r, 1, merged)
    best = None
    for c in merged.centres.tolist():
        ea, eb = g.edge_index(a, c), g.edge_index(c, b)
        if ea >= 0 and eb >= 0:
            tot = float(g.lengths[ea] + g.lengths[eb])
            if best is None or tot < best[0]:
                best = (tot, c)
    if best is None:
        return BridgeResult(None, math.inf, k_star, r, None, merged)
    return BridgeResult(pA + [best[1]] + pB[::-1], lA + lB + best[0], k_star, r, 2, merged)
