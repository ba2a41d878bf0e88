"""Weight-dependent percolation: keep e = {u,v} iff L_e <= thr(W_u, W_v)."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dist import EdgeLengthDistribution
from .graph import SpatialGraph
from .spatial import ContractError


@dataclass(frozen=True)
class PercolationRule:
    c: float
    gamma_tilde: float
    dist: EdgeLengthDistribution
    alpha: float = math.inf  # when known, c < alpha is enforced

    def __post_init__(self):
        if not 0 < self.c < self.alpha:
            raise ValueError("need 0 < c < alpha")
        if not 0 < self.gamma_tilde < 1:
            raise ValueError("need 0 < gamma_tilde < 1")


def keep_probability_floor(rule: PercolationRule, w1, w2):
    """exp(-c (ln w1)^g - c (ln w2)^g)."""
    g = rule.gamma_tilde
    return np.exp(-rule.c * (np.log(w1) ** g + np.log(w2) ** g))


def threshold(rule: PercolationRule, w1, w2):
    """F^{-1}(exp(-c (ln w1)^g - c (ln w2)^g)); at w1 = w2 = 1 this is the essential supremum."""
    w1 = np.asarray(w1, float)
    w2 = np.asarray(w2, float)
    if np.any(w1 < 1) or np.any(w2 < 1):
        raise ValueError("weights must be >= 1")
    return rule.dist.quantile_closed(keep_probability_floor(rule, w1, w2))


def percolate(g: SpatialGraph, rule: PercolationRule) -> SpatialGraph:
    if g.lengths is None:
        raise ContractError("percolation needs edge lengths")
    law = g.provenance.get("length_law")
    if law is not None and law != rule.dist.spec:
        raise ContractError(f"rule law {rule.dist.spec} differs from the graph's {law}")
    thr = threshold(rule, g.weights[g.edges[:, 0]], g.weights[g.edges[:, 1]])
    keep = g.lengths <= thr
    return g.edge_subgraph(keep, percolation={"c": rule.c, "gamma_tilde": rule.gamma_tilde,
                                              "law": rule.dist.spec})


def mapped_weight(w, c: float, alpha: float, gamma_tilde: float):
    """m(w) = w exp(-(c/alpha) (ln w)^gamma_tilde)."""
    if not 0 < c < alpha and not math.isclose(c, alpha):
        raise ValueError("need 0 < c < alpha")
    w = np.asarray(w, float)
    if np.any(w < 1):
        raise ValueError("weights must be >= 1")
    out = w * np.exp(-(c / alpha) * np.log(w) ** gamma_tilde)
    return out if out.ndim else float(out)
