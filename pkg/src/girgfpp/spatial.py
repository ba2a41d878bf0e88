"""Point sets, the blow-up map, Poisson couplings across intensities, cell index."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .rng import SALT_RETAIN, keyed_uniform, stream

METRICS = ("box", "torus")


class ContractError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PointSet:
    """Points in the centred window [-side/2, side/2]^d; ids are row indices."""

    coords: np.ndarray
    side: float = 1.0
    metric: str = "box"

    def __post_init__(self):
        c = np.array(self.coords, dtype=float, copy=True)
        if c.ndim == 1:
            c = c.reshape(-1, 1)
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)
        if self.metric not in METRICS:
            raise ContractError(f"metric must be one of {METRICS}")
        if self.metric == "torus" and self.d != 1:
            raise ContractError("torus metric is only supported for d=1")
        h = self.side / 2.0
        if c.size and (c.min() < -h - 1e-9 * max(1.0, h) or c.max() > h + 1e-9 * max(1.0, h)):
            raise ContractError("coordinates outside the window")

    @property
    def d(self) -> int:
        return self.coords.shape[1]

    def __len__(self) -> int:
        return self.coords.shape[0]

    def distance(self, i, j) -> np.ndarray:
        return metric_distance(self.coords[i], self.coords[j], self.side, self.metric)

    def subset(self, ids) -> "PointSet":
        return PointSet(self.coords[np.asarray(ids, dtype=np.int64)], self.side, self.metric)


def metric_distance(x, y, side: float, metric: str = "box"):
    diff = np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
    if metric == "torus":
        diff = np.minimum(diff, side - diff)
    return np.sqrt(np.sum(diff * diff, axis=-1))


def xi(n: int) -> float:
    """xi_n = sqrt(4 ln n / n)."""
    if n < 3:
        raise ValueError("xi_n needs n >= 3")
    return math.sqrt(4.0 * math.log(n) / n)


def sample_binomial_points(n: int, d: int, rng: np.random.Generator) -> PointSet:
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 and d >= 1")
    return PointSet(rng.random((n, d)) - 0.5, 1.0, "box")


def sample_ppp(intensity: float, side: float, d: int, rng: np.random.Generator,
               metric: str = "box") -> PointSet:
    """Poisson process of the given intensity on [-side/2, side/2]^d."""
    if intensity < 0:
        raise ValueError("intensity must be nonnegative")
    count = int(rng.poisson(intensity * side ** d))
    return PointSet((rng.random((count, d)) - 0.5) * side, side, metric)


def blow_up(ps: PointSet, n: int) -> PointSet:
    """Scale a point set on [-1/2,1/2]^d by n^{1/d}."""
    if not math.isclose(ps.side, 1.0):
        raise ContractError("blow_up expects the unit window")
    s = n ** (1.0 / ps.d)
    return PointSet(ps.coords * s, s, ps.metric)


# ---------------------------------------------------------------------------
# coupling across intensities


@dataclass(frozen=True, eq=False)
class CoupledEnsemble:
    base: PointSet
    U: np.ndarray
    n: int
    seed: int
    base_intensity: float
    bgirg_ids: np.ndarray | None
    straddle_ok: bool

    @property
    def xi_n(self) -> float:
        return xi(self.n)

    def retained(self, lam: float) -> np.ndarray:
        """Ids kept at intensity lam (U_v <= lam / base intensity), increasing."""
        if lam > self.base_intensity:
            raise ValueError("lambda exceeds the base intensity")
        return np.flatnonzero(self.U <= lam / self.base_intensity)


def sample_coupled_ppp(n: int, d: int, seed: int) -> CoupledEnsemble:
    """Base PPP of intensity 1+xi_3 on the volume-n box, with keyed retention uniforms."""
    if n < 3:
        raise ValueError("coupled ensemble needs n >= 3")
    base_int = 1.0 + xi(3)
    side = n ** (1.0 / d)
    base = sample_ppp(base_int, side, d, stream(seed, "ppp", n, d))
    U = keyed_uniform(seed, np.arange(len(base)), salt=SALT_RETAIN)
    x = xi(n)
    lo = np.flatnonzero(U <= (1.0 - x) / base_int)
    hi = np.flatnonzero(U <= (1.0 + x) / base_int)
    ok = lo.size <= n <= hi.size
    ids = None
    if ok:
        extra = np.setdiff1d(hi, lo, assume_unique=True)
        pick = stream(seed, "bgirg", n, d).choice(extra, size=n - lo.size, replace=False)
        ids = np.sort(np.concatenate([lo, pick]))
    return CoupledEnsemble(base, U, n, seed, base_int, ids, ok)


# ---------------------------------------------------------------------------
# cell index


@dataclass(frozen=True, eq=False)
class CellIndex:
    cell_side: float
    cells_per_axis: int
    occupancy: dict = field(repr=False)

    def cell_of(self, x, side: float) -> tuple:
        c = np.floor((np.asarray(x, dtype=float) + side / 2.0) / self.cell_side).astype(int)
        return tuple(np.clip(c, 0, self.cells_per_axis - 1).tolist())


def build_cell_index(ps: PointSet, cell_side: float) -> CellIndex:
    if cell_side <= 0:
        raise ValueError("cell side must be positive")
    m = max(1, int(math.ceil(ps.side / cell_side)))
    idx = np.clip(np.floor((ps.coords + ps.side / 2.0) / cell_side).astype(np.int64), 0, m - 1)
    occ: dict = {}
    for i, key in enumerate(map(tuple, idx.tolist())):
        occ.setdefault(key, []).append(i)
    return CellIndex(cell_side, m, {k: np.array(v, dtype=np.int64) for k, v in occ.items()})


def neighbors_within(index: CellIndex, ps: PointSet, center, r: float) -> list[int]:
    """Ids at metric distance <= r from ``center``, sorted."""
    if r < 0:
        raise ValueError("radius must be nonnegative")
    center = np.asarray(center, dtype=float).reshape(-1)
    m = index.cells_per_axis
    reach = int(math.ceil(r / index.cell_side)) + 1
    base = index.cell_of(center, ps.side)
    ranges = []
    for c in base:
        if ps.metric == "torus":
            if 2 * reach + 1 >= m:
                ranges.append(range(m))
            else:
                ranges.append(sorted({(c + o) % m for o in range(-reach, reach + 1)}))
        else:
            ranges.append(range(max(0, c - reach), min(m, c + reach + 1)))
    found = []
    for key in itertools.product(*ranges):
        ids = index.occupancy.get(key)
        if ids is None:
            continue
        dist = metric_distance(ps.coords[ids], center, ps.side, ps.metric)
        found.append(ids[dist <= r])
    if not found:
        return []
    return sorted(np.concatenate(found).tolist())


# ---------------------------------------------------------------------------
# point dump


def write_points(ps: PointSet, path: str | Path) -> None:
    lines = [f"PTS v1 d={ps.d} side={ps.side!r} metric={ps.metric}"]
    for i, row in enumerate(ps.coords):
        lines.append(" ".join([str(i)] + [repr(float(x)) for x in row]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_points(path: str | Path) -> PointSet:
    lines = Path(path).read_text().splitlines()
    head = lines[0].split()
    if head[:2] != ["PTS", "v1"]:
        raise ContractError("not a PTS v1 file")
    meta = dict(tok.split("=", 1) for tok in head[2:])
    d = int(meta["d"])
    rows = [ln.split() for ln in lines[1:] if ln.strip()]
    coords = np.array([[float(x) for x in r[1:]] for r in rows], dtype=float).reshape(-1, d)
    if [int(r[0]) for r in rows] != list(range(len(rows))):
        raise ContractError("ids must be dense 0..N-1")
    return PointSet(coords, float(meta["side"]), meta["metric"])
