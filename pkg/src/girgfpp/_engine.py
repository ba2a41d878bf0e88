"""Compiled edge-sampling engine shared by all generators.

Positions live in the unit cube [0,1)^d (or the unit circle for d=1 torus);
``scale`` converts unit distances to model distances. Vertices are bucketed
into weight layers [2^j, 2^{j+1}) and, inside a layer, sorted by Morton code so
that every dyadic cell is a contiguous run at every level.

For a layer pair (j,k) a target level l* is chosen where cells are about as
wide as the distance at which the connection probability saturates. Every
vertex pair is then handled exactly once:

* type I: cells touch at level l* -> every pair gets its own keyed coin;
* type II: cells at level l <= l* that do not touch while their parents do ->
  candidates are drawn with geometric skipping at the block-wide upper bound
  p_bar and accepted with probability p/p_bar (exact thinning).

Type II randomness is keyed by (seed, layer pair, level, cell pair), so the
output depends only on the inputs, never on iteration order.
"""
from __future__ import annotations

import math

import numba
import numpy as np

from .rng import SALT_EDGE, pair_uniform_nb

# kernel kinds
CANONICAL, LOWER, UPPER, THRESHOLD, SFP, HRG_THRESHOLD, HRG_TEMPERATURE = range(7)

_SFP_NEAR = 1.2  # lattice distances are 1 or >= sqrt(2)


@numba.njit(cache=True)
def _powlaw(a1, alpha, d, r, wu, wv):
    if r <= 0.0:
        return math.inf
    return a1 * math.exp(alpha * (math.log(wu * wv) - d * math.log(r)))


@numba.njit(cache=True)
def _cosh_dh(r, au, av):
    s = math.sin(0.5 * r)
    return math.cosh(au - av) + 2.0 * s * s * math.sinh(au) * math.sinh(av)


@numba.njit(cache=True)
def _logistic(x, R, T):
    z = (math.acosh(max(x, 1.0)) - R) / (2.0 * T)
    if z > 700.0:
        return 0.0
    return 1.0 / (1.0 + math.exp(z))


@numba.njit(cache=True)
def kernel_prob(kind, kp, r, wu, wv, au, av):
    """Connection probability at model distance r."""
    if kind == CANONICAL:
        return min(1.0, _powlaw(kp[0], kp[1], kp[2], r, wu, wv))
    if kind == LOWER:
        # kp: c1, a1_under, a2, gamma, alpha, d
        first = math.exp(-kp[2] * (math.log(wu) ** kp[3] + math.log(wv) ** kp[3]))
        return min(1.0, kp[0] * min(first, _powlaw(kp[1], kp[4], kp[5], r, wu, wv)))
    if kind == UPPER:
        # kp: C1, a1_over, alpha, d
        return min(1.0, kp[0] * min(1.0, _powlaw(kp[1], kp[2], kp[3], r, wu, wv)))
    if kind == THRESHOLD:
        return 1.0 if r <= kp[0] * (wu * wv) ** (1.0 / kp[1]) else 0.0
    if kind == SFP:
        if r < _SFP_NEAR:
            return 1.0
        return -math.expm1(-kp[0] * r ** (-kp[1]) * wu * wv)
    if kind == HRG_THRESHOLD:
        return 1.0 if _cosh_dh(r, au, av) <= math.cosh(kp[0]) else 0.0
    if kind == HRG_TEMPERATURE:
        return _logistic(_cosh_dh(r, au, av), kp[0], kp[1])
    return 0.0


@numba.njit(cache=True)
def kernel_bound(kind, kp, rmin, wmax_u, wmax_v, wmin_u, wmin_v, amin_u, amin_v):
    """Upper bound of kernel_prob over a block: distances >= rmin, weights in
    [wmin, wmax], auxiliary radii >= amin."""
    if kind == LOWER:
        first = math.exp(-kp[2] * (math.log(wmin_u) ** kp[3] + math.log(wmin_v) ** kp[3]))
        return min(1.0, kp[0] * min(first, _powlaw(kp[1], kp[4], kp[5], rmin, wmax_u, wmax_v)))
    if kind == HRG_THRESHOLD or kind == HRG_TEMPERATURE:
        s = math.sin(0.5 * min(rmin, math.pi))
        x = 1.0 + 2.0 * s * s * math.sinh(amin_u) * math.sinh(amin_v)
        if kind == HRG_THRESHOLD:
            return 1.0 if x <= math.cosh(kp[0]) else 0.0
        return _logistic(x, kp[0], kp[1])
    return kernel_prob(kind, kp, rmin, wmax_u, wmax_v, 1.0, 1.0)


@numba.njit(cache=True)
def kernel_char_dist(kind, kp, wu, wv, au, av):
    """Model distance below which the probability is of order one."""
    if kind == CANONICAL:
        return (kp[0] * (wu * wv) ** kp[1]) ** (1.0 / (kp[1] * kp[2]))
    if kind == LOWER:
        return (kp[1] * (wu * wv) ** kp[4]) ** (1.0 / (kp[4] * kp[5]))
    if kind == UPPER:
        return (max(kp[0], 1e-300) * kp[1] * (wu * wv) ** kp[2]) ** (1.0 / (kp[2] * kp[3]))
    if kind == THRESHOLD:
        return kp[0] * (wu * wv) ** (1.0 / kp[1])
    if kind == SFP:
        return max(1.0, (kp[0] * wu * wv) ** (1.0 / kp[1]))
    den = 2.0 * math.sinh(max(au, 1e-12)) * math.sinh(max(av, 1e-12))
    v = math.cosh(kp[0]) / den
    if v >= 1.0:
        return math.pi
    return 2.0 * math.asin(math.sqrt(v))


# ---------------------------------------------------------------------------
# geometry helpers


@numba.njit(cache=True)
def _unit_dist(x, y, torus):
    s = 0.0
    for i in range(x.shape[0]):
        t = abs(x[i] - y[i])
        if torus:
            t = min(t, 1.0 - t)
        s += t * t
    return math.sqrt(s)


@numba.njit(cache=True)
def _decode(code, level, d, out):
    for i in range(d):
        out[i] = 0
    for bit in range(level):
        for i in range(d - 1, -1, -1):
            out[i] |= (code & 1) << bit
            code >>= 1


@numba.njit(cache=True)
def _encode(c, level, d):
    code = 0
    for bit in range(level - 1, -1, -1):
        for i in range(d):
            code = (code << 1) | ((c[i] >> bit) & 1)
    return code


def morton_codes(cells: np.ndarray, level: int) -> np.ndarray:
    """Vectorized Morton interleave of integer cell coordinates (N, d)."""
    n, d = cells.shape
    code = np.zeros(n, dtype=np.int64)
    for bit in range(level - 1, -1, -1):
        for i in range(d):
            code = (code << 1) | ((cells[:, i] >> bit) & 1)
    return code


@numba.njit(cache=True)
def _mix(z):
    z = (z ^ (z >> numba.uint64(30))) * numba.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> numba.uint64(27))) * numba.uint64(0x94D049BB133111EB)
    return z ^ (z >> numba.uint64(31))


@numba.njit(cache=True)
def _block_state(seed, j, k, level, ca, cb):
    g = numba.uint64(0x9E3779B97F4A7C15)
    h = _mix(numba.uint64(seed) + g)
    h = _mix(h ^ (numba.uint64(j) * g + numba.uint64(k) + numba.uint64(7)))
    h = _mix(h ^ (numba.uint64(level) + g))
    h = _mix(h ^ (numba.uint64(ca) + g))
    h = _mix(h ^ (numba.uint64(cb) * numba.uint64(0xBF58476D1CE4E5B9) + g))
    return h


@numba.njit(cache=True)
def _draw(state, t):
    h = _mix(state + numba.uint64(t + 1) * numba.uint64(0x9E3779B97F4A7C15))
    return (float(h >> numba.uint64(11)) + 0.5) * 1.1102230246251565e-16


# ---------------------------------------------------------------------------
# edge buffer


@numba.njit(cache=True)
def _push(buf, count, u, v):
    if count >= buf.shape[0]:
        nb = np.empty((buf.shape[0] * 2, 2), dtype=np.int64)
        nb[: buf.shape[0]] = buf
        buf = nb
    buf[count, 0] = u
    buf[count, 1] = v
    return buf


# ---------------------------------------------------------------------------
# naive oracle


@numba.njit(cache=True)
def naive_edges(pos, w, aux, keys, scale, torus, kind, kp, seed, max_edges):
    n = pos.shape[0]
    buf = np.empty((max(16, n), 2), dtype=np.int64)
    count = 0
    for a in range(n):
        for b in range(a + 1, n):
            r = scale * _unit_dist(pos[a], pos[b], torus)
            p = kernel_prob(kind, kp, r, w[a], w[b], aux[a], aux[b])
            if p > 0.0 and pair_uniform_nb(seed, SALT_EDGE, keys[a], keys[b]) <= p:
                buf = _push(buf, count, a, b)
                count += 1
                if count > max_edges:
                    return buf[:0], -1
    return buf[:count], count


# ---------------------------------------------------------------------------
# hierarchical engine


@numba.njit(cache=True)
def _build_occupancy(codes, lstart, lneed, lmax, d, base, occ):
    nl = lstart.shape[0] - 1
    for j in range(nl):
        s, e = lstart[j], lstart[j + 1]
        if s == e:
            continue
        for lev in range(lneed[j] + 1):
            off = base[j, lev]
            ncell = 1 << (d * lev)
            shift = d * (lmax - lev)
            for c in range(ncell + 1):
                occ[off + c] = 0
            for t in range(s, e):
                occ[off + (codes[t] >> shift) + 1] += 1
            run = s
            for c in range(ncell + 1):
                run += occ[off + c]
                occ[off + c] = run
            # occ[off + c] is now the start of cell c (with the first slot = s)


@numba.njit(cache=True)
def _process_block(buf, count, pos, w, aux, keys, perm, scale, torus, kind, kp, seed,
                   sa, ea, sb, eb, same_cell, touching, pbar, state):
    na = ea - sa
    nb = eb - sb
    if touching:
        for x in range(sa, ea):
            start = x + 1 if same_cell else sb
            for y in range(start, eb):
                r = scale * _unit_dist(pos[x], pos[y], torus)
                p = kernel_prob(kind, kp, r, w[x], w[y], aux[x], aux[y])
                if p > 0.0 and pair_uniform_nb(seed, SALT_EDGE, keys[x], keys[y]) <= p:
                    buf = _push(buf, count, perm[x], perm[y])
                    count += 1
        return buf, count
    total = na * nb
    lq = math.log1p(-pbar) if pbar < 1.0 else 0.0
    idx = -1
    t = 0
    while True:
        if pbar >= 1.0:
            idx += 1
        else:
            u = _draw(state, t)
            t += 1
            step = math.floor(math.log(u) / lq)
            if step >= total:
                break
            idx += 1 + int(step)
        if idx >= total:
            break
        x = sa + idx // nb
        y = sb + idx % nb
        r = scale * _unit_dist(pos[x], pos[y], torus)
        p = kernel_prob(kind, kp, r, w[x], w[y], aux[x], aux[y])
        if p > 0.0:
            if pbar >= 1.0:
                acc = pair_uniform_nb(seed, SALT_EDGE, keys[x], keys[y]) <= p
            else:
                acc = _draw(state, t) * pbar <= p
                t += 1
            if acc:
                buf = _push(buf, count, perm[x], perm[y])
                count += 1
    return buf, count


@numba.njit(cache=True)
def hierarchical_edges(pos, w, aux, keys, perm, codes, lstart, lstats, lpair, lmax, d,
                       base, occ, scale, torus, kind, kp, seed, max_edges):
    nl = lstart.shape[0] - 1
    buf = np.empty((max(16, pos.shape[0]), 2), dtype=np.int64)
    count = 0
    ca = np.zeros(d, dtype=np.int64)
    cb = np.zeros(d, dtype=np.int64)
    cand = np.zeros((d, 6), dtype=np.int64)
    ncand = np.zeros(d, dtype=np.int64)
    pick = np.zeros(d, dtype=np.int64)
    for j in range(nl):
        if lstart[j] == lstart[j + 1]:
            continue
        for k in range(j, nl):
            if lstart[k] == lstart[k + 1]:
                continue
            # iterate over the sparser layer
            if lstart[j + 1] - lstart[j] <= lstart[k + 1] - lstart[k]:
                src, dst = j, k
            else:
                src, dst = k, j
            lstar = lpair[j, k]
            wmax_s, wmin_s, amin_s = lstats[src, 0], lstats[src, 1], lstats[src, 2]
            wmax_d, wmin_d, amin_d = lstats[dst, 0], lstats[dst, 1], lstats[dst, 2]
            for lev in range(lstar + 1):
                if lev == 0 and lstar > 0:
                    continue
                side = 1 << lev
                shift = d * (lmax - lev)
                offs = base[src, lev]
                offd = base[dst, lev]
                t = lstart[src]
                while t < lstart[src + 1]:
                    code_a = codes[t] >> shift
                    sa = occ[offs + code_a]
                    ea = occ[offs + code_a + 1]
                    t = ea
                    _decode(code_a, lev, d, ca)
                    for i in range(d):
                        if lev == 0:
                            cand[i, 0] = 0
                            ncand[i] = 1
                        elif torus and side <= 4:
                            for b in range(side):
                                cand[i, b] = b
                            ncand[i] = side
                        else:
                            m = 0
                            pa = ca[i] >> 1
                            for dp in range(-1, 2):
                                pb = pa + dp
                                if torus:
                                    pb = pb % (side >> 1)
                                elif pb < 0 or pb >= (side >> 1):
                                    continue
                                cand[i, m] = 2 * pb
                                cand[i, m + 1] = 2 * pb + 1
                                m += 2
                            ncand[i] = m
                    for i in range(d):
                        pick[i] = 0
                    while True:
                        gap2 = 0.0
                        touching = True
                        for i in range(d):
                            cb[i] = cand[i, pick[i]]
                            diff = abs(cb[i] - ca[i])
                            if torus:
                                diff = min(diff, side - diff)
                            if diff > 1:
                                touching = False
                                g = (diff - 1) / side
                                gap2 += g * g
                        if (touching and lev == lstar) or (not touching):
                            code_b = _encode(cb, lev, d)
                            sb = occ[offd + code_b]
                            eb = occ[offd + code_b + 1]
                            ok = eb > sb
                            same = False
                            if ok and j == k:
                                if code_b < code_a:
                                    ok = False
                                elif code_b == code_a:
                                    same = True
                            if ok:
                                rmin = scale * math.sqrt(gap2)
                                pbar = kernel_bound(kind, kp, rmin, wmax_s, wmax_d, wmin_s, wmin_d,
                                                    amin_s, amin_d)
                                if pbar > 0.0:
                                    state = _block_state(seed, src, dst, lev, code_a, code_b)
                                    buf, count = _process_block(
                                        buf, count, pos, w, aux, keys, perm, scale, torus, kind, kp,
                                        seed, sa, ea, sb, eb, same, touching, pbar, state)
                                    if count > max_edges:
                                        return buf[:0], -1
                        # advance the odometer
                        i = 0
                        while i < d:
                            pick[i] += 1
                            if pick[i] < ncand[i]:
                                break
                            pick[i] = 0
                            i += 1
                        if i == d:
                            break
    return buf[:count], count


@numba.njit(cache=True)
def _layer_pairs(lstats, nonempty, kind, kp, scale, lmax):
    nl = lstats.shape[0]
    lp = np.zeros((nl, nl), dtype=np.int64)
    for j in range(nl):
        for k in range(j, nl):
            if not (nonempty[j] and nonempty[k]):
                continue
            r1 = kernel_char_dist(kind, kp, lstats[j, 0], lstats[k, 0], lstats[j, 2], lstats[k, 2])
            if r1 <= 0.0:
                lev = lmax
            elif r1 >= scale:
                lev = 0
            else:
                lev = int(math.floor(math.log2(scale / r1)))
            lev = max(0, min(lmax, lev))
            lp[j, k] = lev
            lp[k, j] = lev
    return lp


def sample_edges(unit_pos, w, aux, keys, scale, torus, kind, kp, seed,
                 max_edges=50_000_000, naive=False):
    """Edge list (M,2) of original ids with u < v, sorted. Raises on cap."""
    unit_pos = np.ascontiguousarray(unit_pos, dtype=np.float64)
    n, d = unit_pos.shape
    w = np.ascontiguousarray(w, dtype=np.float64)
    aux = np.ascontiguousarray(aux, dtype=np.float64)
    keys = np.ascontiguousarray(keys, dtype=np.int64)
    kp = np.asarray(kp, dtype=np.float64)
    seed = int(seed) & 0x7FFFFFFFFFFFFFFF
    if n < 2:
        return np.zeros((0, 2), dtype=np.int64)
    if naive:
        edges, count = naive_edges(unit_pos, w, aux, keys, float(scale), bool(torus), kind, kp,
                                   seed, max_edges)
    else:
        lmax = int(max(0, min(math.floor(math.log2(n) / d), 60 // d)))
        cells = np.clip(np.floor(unit_pos * (1 << lmax)).astype(np.int64), 0, (1 << lmax) - 1)
        codes = morton_codes(cells, lmax)
        layer = np.floor(np.log2(w)).astype(np.int64)
        nl = int(layer.max()) + 1
        perm = np.lexsort((codes, layer))
        codes_s = codes[perm]
        layer_s = layer[perm]
        lstart = np.searchsorted(layer_s, np.arange(nl + 1)).astype(np.int64)
        lstats = np.ones((nl, 3))
        nonempty = lstart[1:] > lstart[:-1]
        ws, auxs = w[perm], aux[perm]
        for j in np.flatnonzero(nonempty):
            s, e = lstart[j], lstart[j + 1]
            lstats[j] = (ws[s:e].max(), ws[s:e].min(), auxs[s:e].min())
        lpair = _layer_pairs(lstats, nonempty, kind, kp, float(scale), lmax)
        lneed = lpair.max(axis=1)
        base = np.zeros((nl, lmax + 1), dtype=np.int64)
        off = 0
        for j in range(nl):
            for lev in range(int(lneed[j]) + 1):
                base[j, lev] = off
                off += (1 << (d * lev)) + 1
        occ = np.zeros(max(off, 1), dtype=np.int64)
        _build_occupancy(codes_s, lstart, lneed, lmax, d, base, occ)
        edges, count = hierarchical_edges(
            unit_pos[perm], ws, auxs, keys[perm], perm.astype(np.int64), codes_s, lstart,
            lstats, lpair, lmax, d, base, occ, float(scale), bool(torus), kind, kp, seed, max_edges)
    if count < 0:
        raise ResourceCapError(f"edge count exceeded the cap of {max_edges}")
    edges = np.sort(edges, axis=1)
    order = np.lexsort((edges[:, 1], edges[:, 0]))
    return edges[order]


class ResourceCapError(RuntimeError):
    pass
