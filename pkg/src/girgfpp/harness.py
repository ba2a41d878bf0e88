"""Distance experiments: build graphs over an n grid, sample giant pairs, record d_L and d_G.

Each (n, replica) task is a pure function of the config, so results are
identical for any worker count; tasks are merged in canonical order.
"""
from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .dist import VertexWeightModel
from .fpp import assign_edge_lengths, fmt, graph_distance, shortest_weighted
from .genmodel import generate_girg, generate_hrg, generate_sfp, giant_component
from .graph import SpatialGraph
from .rng import derive_seed, stream
from .stats import ecdf_and_ks

log = logging.getLogger("girgfpp")

HEADER = ("model", "n", "seed", "u", "v", "dG", "dL", "in_giant")


@dataclass
class DistanceSampleSet:
    rows: list = field(default_factory=list)  # tuples in HEADER order
    skipped: list = field(default_factory=list)

    def dL(self, n: int, giant_only: bool = True) -> np.ndarray:
        return np.array([r[6] for r in self.rows if r[1] == n and (r[7] or not giant_only)], float)

    def dG(self, n: int, giant_only: bool = True) -> np.ndarray:
        return np.array([r[5] for r in self.rows if r[1] == n and (r[7] or not giant_only)], float)

    @property
    def n_values(self) -> list[int]:
        return sorted({r[1] for r in self.rows})

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(HEADER)
        for m, n, s, u, v, dg, dl, ing in self.rows:
            w.writerow((m, n, s, u, v, fmt(dg), fmt(dl), int(ing)))
        return buf.getvalue()

    def write(self, path) -> None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(self.to_csv())


def read_distance_csv(path) -> DistanceSampleSet:
    out = DistanceSampleSet()
    with open(path, newline="") as fh:
        for r in csv.DictReader(fh):
            out.rows.append((r["model"], int(r["n"]), int(r["seed"]), int(r["u"]), int(r["v"]),
                             float(r["dG"]), float(r["dL"]), bool(int(r["in_giant"]))))
    return out


def build_graph(config: ExperimentConfig, n: int, seed: int) -> SpatialGraph:
    params = config.params_for(n)
    cap = config.max_edges
    if config.model in ("girg", "girg_threshold"):
        return generate_girg(params, n, VertexWeightModel(params.tau), seed, max_edges=cap)
    if config.model == "sfp":
        return generate_sfp(params, seed=seed, max_edges=cap)
    return generate_hrg(params, seed, max_edges=cap)


def sfp_flagged(config: ExperimentConfig) -> bool:
    """True when an SFP config lies outside gamma in (1,2)."""
    return config.model == "sfp" and not config.params_for(config.n_grid[0]).headline_regime


def _sfp_pair(g: SpatialGraph, m: int) -> tuple[int, int]:
    """Origin and the vertex closest to m e_1, ties by smallest id."""
    x = g.coords
    target = np.zeros(g.d)
    target[0] = m
    o = int(np.argmin(np.linalg.norm(x, axis=1)))
    t = int(np.argmin(np.linalg.norm(x - target, axis=1)))
    return o, t


def run_task(config: ExperimentConfig, n: int, replica: int) -> tuple[list, str | None]:
    seed = derive_seed(config.seed, "replica", n, replica)
    if config.model == "sfp":
        # window of radius 2m so that m e_1 lies well inside
        cfg = replace(config, n_grid=(2 * n,))
        g = build_graph(cfg, 2 * n, seed)
    else:
        g = build_graph(config, n, seed)
    g = assign_edge_lengths(g, config.dist, derive_seed(seed, "lengths"))
    comp = giant_component(g)
    giant = comp.giant_ids
    if config.model == "sfp":
        u, v = _sfp_pair(g, n)
        ing = bool(comp.labels[u] == comp.labels[v] == comp.giant)
        pairs = [(u, v, ing)]
    else:
        if giant.size < 2:
            return [], f"n={n} replica={replica}: giant has {giant.size} vertices, skipped"
        P = min(config.pairs, giant.size // 2)
        idx = stream(seed, "pairs").choice(giant.size, 2 * P, replace=False)
        a, b = giant[idx[:P]], giant[idx[P:]]
        pairs = sorted((int(min(x, y)), int(max(x, y)), True) for x, y in zip(a, b))
    rows = []
    for u, v, ing in pairs:
        dl, _ = shortest_weighted(g, u, v)
        dg = graph_distance(g, u, v)
        rows.append((config.model, int(n), int(seed), u, v, dg, dl, ing))
    return rows, None


def _task_star(args):
    return run_task(*args)


def run_distance_experiment(config: ExperimentConfig, workers: int | None = None,
                            write: bool = True) -> DistanceSampleSet:
    tasks = [(config, n, r) for n in config.n_grid for r in range(config.replicas)]
    workers = config.workers if workers is None else workers
    if workers <= 1:
        results = [_task_star(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_task_star, tasks))
    out = DistanceSampleSet()
    for rows, warn in results:
        if warn:
            log.warning(warn)
            out.skipped.append(warn)
        out.rows.extend(rows)
    if write and config.output:
        out.write(config.output)
    return out


def summarize(samples: DistanceSampleSet, ecdf_csv: str | None = None) -> dict:
    """Per-n summaries and KS distances between consecutive n values (finite d_L only)."""
    per_n = {}
    ns = samples.n_values
    for n in ns:
        dl = samples.dL(n)
        dl = dl[np.isfinite(dl)]
        dg = samples.dG(n)
        dg = dg[np.isfinite(dg)]
        per_n[str(n)] = {
            "pairs": int(dl.size),
            "median_dL": float(np.median(dl)) if dl.size else math.nan,
            "mean_dL": float(np.mean(dl)) if dl.size else math.nan,
            "median_dG": float(np.median(dg)) if dg.size else math.nan,
            "mean_dG": float(np.mean(dg)) if dg.size else math.nan,
        }
    ks = {}
    for a, b in zip(ns, ns[1:]):
        x, y = samples.dL(a), samples.dL(b)
        x, y = x[np.isfinite(x)], y[np.isfinite(y)]
        if x.size and y.size:
            path = None
            if ecdf_csv:
                path = str(Path(ecdf_csv).with_name(f"{Path(ecdf_csv).stem}_{a}_{b}.csv"))
            ks[f"{a}-{b}"] = float(ecdf_and_ks(x, y, path)[0])
    return {"per_n": per_n, "ks_consecutive": ks, "skipped": samples.skipped}
