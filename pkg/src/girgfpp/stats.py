"""Statistical instruments: Hill tail estimator, plateau detection, ECDFs and KS."""
from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np


def hill_estimator(values, k_top: int) -> float:
    """Hill estimate of the tail exponent from the ``k_top`` largest values.

    Returns NaN when the top order statistics are all tied (degenerate sample).
    """
    if k_top < 2:
        raise ValueError("k_top must be at least 2")
    x = np.asarray(values, dtype=float)
    if k_top >= x.size:
        raise ValueError("k_top must be smaller than the sample size")
    if np.any(x <= 0):
        raise ValueError("Hill estimator needs positive values")
    top = np.sort(x)[::-1][: k_top + 1]
    spacing = float(np.mean(np.log(top[:k_top]) - math.log(top[k_top])))
    if spacing <= 0.0:
        return math.nan
    return 1.0 / spacing


def hill_top_fraction(values, frac: float = 0.01) -> float:
    x = np.asarray(values, dtype=float)
    x = x[x > 0]
    return hill_estimator(x, max(2, int(frac * x.size)))


def hill_curve(values, k_grid) -> np.ndarray:
    x = np.sort(np.asarray(values, dtype=float))[::-1]
    logs = np.log(x)
    csum = np.cumsum(logs)
    out = []
    for k in k_grid:
        spacing = csum[k - 1] / k - logs[k]
        out.append(1.0 / spacing if spacing > 0 else math.nan)
    return np.array(out)


def hill_plateau(values, rel_tol: float = 0.05, min_span: float = 4.0, points: int = 25):
    """Median Hill estimate over the longest stable run of k, or None.

    A run is stable when its estimates stay within a factor ``1 + rel_tol`` of
    each other while k ranges over at least a factor ``min_span``. The k grid
    is geometric between 1% and 20% of the sample.
    """
    x = np.asarray(values, dtype=float)
    n = x.size
    lo, hi = max(10, n // 100), max(11, n // 5)
    if hi >= n:
        return None
    ks = np.unique(np.geomspace(lo, hi, points).astype(int))
    est = hill_curve(x, ks)
    best = None
    for i in range(len(ks)):
        for j in range(len(ks) - 1, i, -1):
            seg = est[i : j + 1]
            if np.any(~np.isfinite(seg)) or seg.min() <= 0:
                continue
            if seg.max() / seg.min() <= 1 + rel_tol and ks[j] / ks[i] >= min_span:
                if best is None or (j - i) > (best[1] - best[0]):
                    best = (i, j)
                break
    if best is None:
        return None
    return float(np.median(est[best[0] : best[1] + 1]))


def ecdf_table(values) -> tuple[np.ndarray, np.ndarray]:
    """Distinct sorted values and the right-continuous ECDF at each of them."""
    x = np.sort(np.asarray(values, dtype=float))
    uniq = np.unique(x)
    return uniq, np.searchsorted(x, uniq, side="right") / x.size


def ks_distance(a, b) -> float:
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise ValueError("KS distance needs two nonempty samples")
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def ecdf_and_ks(a, b, csv_path: str | Path | None = None):
    """KS distance plus ECDF tables ``{"a": (x, F), "b": (x, F)}``; optional CSV dump."""
    tables = {"a": ecdf_table(a), "b": ecdf_table(b)}
    d = ks_distance(a, b)
    if csv_path is not None:
        with open(csv_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["sample", "x", "ecdf"])
            for name, (xs, fs) in tables.items():
                for x, f in zip(xs, fs):
                    w.writerow([name, repr(float(x)), repr(float(f))])
    return d, tables
