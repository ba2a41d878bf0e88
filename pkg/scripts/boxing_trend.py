"""Greedy centre-path truncation over mu, on plain and weight-percolated GIRGs.

On percolated graphs every completed path is compared with eps_K at the
certified K of its centres.
"""
import argparse
import json

import numpy as np

from girgfpp.boxing import (BoxingParameterError, blown_up_graph, boxing_constants, build_boxing,
                            certified_K, epsilon_k_bound, greedy_centre_path)
from girgfpp.dist import Exponential
from girgfpp.fpp import assign_edge_lengths
from girgfpp.genmodel import GirgParams, generate_girg
from girgfpp.perc import PercolationRule, percolate
from girgfpp.rng import stream


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=100_000)
    ap.add_argument("--seeds", type=int, default=4)
    ap.add_argument("--centres", type=int, default=15)
    ap.add_argument("--mu", default="10,30,100")
    ap.add_argument("--c", default="0.1,0.3", help="percolation strengths")
    ap.add_argument("--out")
    a = ap.parse_args()
    cs = boxing_constants(0.1, 2.5)
    p = GirgParams(d=2, tau=2.5, alpha=1.95)
    law = Exponential(1.0)
    mus = [float(m) for m in a.mu.split(",")]
    cvals = [float(c) for c in a.c.split(",")]
    trunc = {f"c={c}": {m: [] for m in mus} for c in [0.0] + cvals}
    ratios = []
    for s in range(a.seeds):
        g = assign_edge_lengths(blown_up_graph(generate_girg(p, a.n, seed=s)), law, s)
        graphs = {0.0: g, **{c: percolate(g, PercolationRule(c, 0.5, law, alpha=p.alpha)) for c in cvals}}
        centres = (stream(s, "centres").random((a.centres, 2)) - 0.5) * g.points.side * 0.5
        for c, h in graphs.items():
            for m in mus:
                for x in centres:
                    try:
                        gp = greedy_centre_path(h, build_boxing(h, x, m, cs))
                    except BoxingParameterError:
                        continue
                    trunc[f"c={c}"][m].append(gp.truncated)
                    if c > 0 and not gp.truncated:
                        eps = epsilon_k_bound(law, certified_K(h, gp.path, cs), cs, 0.5, c)
                        ratios.append(gp.total_length / eps)
    out = {"truncation_frequency": {k: {str(m): float(np.mean(v)) for m, v in d.items()} for k, d in trunc.items()},
           "completed_percolated": len(ratios),
           "max_length_over_eps_K": max(ratios) if ratios else None}
    text = json.dumps(out, indent=2)
    print(text)
    if a.out:
        with open(a.out, "w") as fh:
            fh.write(text + "\n")


if __name__ == "__main__":
    main()
