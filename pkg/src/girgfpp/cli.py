"""Command line interface. Exit codes: 0 ok, 2 config error, 3 resource cap, 4 statistical guard."""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys

import numpy as np

EXIT_OK, EXIT_CONFIG, EXIT_CAP, EXIT_GUARD = 0, 2, 3, 4


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(type(o))


def _dump(obj, path=None):
    def clean(x):
        if isinstance(x, float) and not math.isfinite(x):
            return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
        if isinstance(x, dict):
            return {k: clean(v) for k, v in x.items()}
        if isinstance(x, (list, tuple)):
            return [clean(v) for v in x]
        return x

    text = json.dumps(clean(obj), indent=2, default=_json_default)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_generate(a):
    from .config import load_config
    from .graph import write_sgx
    from .harness import build_graph

    cfg = load_config(a.config)
    n = a.n if a.n is not None else cfg.n_grid[0]
    g = build_graph(cfg, n, a.seed if a.seed is not None else cfg.seed)
    if a.law:
        from .dist import parse_distribution
        from .fpp import assign_edge_lengths

        g = assign_edge_lengths(g, parse_distribution(a.law), a.length_seed)
    write_sgx(g, a.out)
    print(f"wrote {a.out}: n={g.n} m={g.m}")
    return EXIT_OK


def cmd_distances(a):
    from dataclasses import replace

    from .config import load_config
    from .harness import run_distance_experiment, sfp_flagged

    cfg = load_config(a.config)
    if a.output:
        cfg = replace(cfg, output=a.output)
    if sfp_flagged(cfg):
        gam = cfg.params_for(cfg.n_grid[0]).gamma_sfp
        print(f"guard: gamma_sfp = {gam:.4g} lies outside (1,2)", file=sys.stderr)
        if not a.force:
            return EXIT_GUARD
    res = run_distance_experiment(cfg, workers=a.workers)
    print(f"wrote {cfg.output}: {len(res.rows)} rows")
    return EXIT_GUARD if sfp_flagged(cfg) else EXIT_OK


def cmd_criterion(a):
    from .dist import explosion_sum, parse_distribution

    r = explosion_sum(parse_distribution(a.law), k_max=a.k_max, tau=a.tau)
    _dump({"law": a.law, "verdict": r.verdict, "partial_sum": r.partial_sum, "terms_used": r.terms_used,
           "tail_bound_estimate": r.tail_bound_estimate, "integral": r.integral,
           "terms": list(r.terms), "flags": list(r.flags)}, a.out)
    return EXIT_OK


def cmd_percolate(a):
    from .dist import parse_distribution
    from .fpp import assign_edge_lengths
    from .graph import read_sgx, write_sgx
    from .perc import PercolationRule, percolate

    g = read_sgx(a.graph)
    dist = parse_distribution(a.law)
    if g.lengths is None:
        g = assign_edge_lengths(g, dist, a.length_seed)
    h = percolate(g, PercolationRule(a.c, a.gamma_tilde, dist))
    write_sgx(h, a.out)
    print(f"wrote {a.out}: kept {h.m} of {g.m} edges")
    return EXIT_OK


def cmd_boxing(a):
    from .boxing import blown_up_graph, boxing_constants, boxing_report, build_boxing
    from .graph import read_sgx

    g = read_sgx(a.graph)
    if math.isclose(g.points.side, 1.0) and g.n > 1:
        g = blown_up_graph(g)
    cs = boxing_constants(a.epsilon, a.tau)
    center = [float(x) for x in a.center.split(",")] if a.center else [0.0] * g.d
    system = build_boxing(g, center, a.mu, cs)
    _dump({"mu": a.mu, "epsilon": a.epsilon, "tau": a.tau, "delta": cs.delta, "C": cs.C, "D": cs.D,
           "annuli": boxing_report(g, system)}, a.out)
    return EXIT_OK


def cmd_brw(a):
    from .brw import brw_environment, simulate_berbrw
    from .genmodel import GirgParams

    p = GirgParams(d=a.d, tau=a.tau, alpha=a.alpha)
    side = a.side if a.side else a.n ** (1.0 / a.d)
    env = brw_environment(p, a.lam, side, a.seed)
    run = simulate_berbrw(env, a.root, a.max_gen, a.cap, p, a.seed)
    _dump({"root": a.root, "truncated": run.truncated, "generations": run.summary()}, a.out)
    return EXIT_OK


def cmd_report(a):
    from .harness import read_distance_csv, summarize

    _dump(summarize(read_distance_csv(a.input), a.ecdf), a.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="girgfpp", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("generate", help="generate one graph from a config")
    s.add_argument("--config", required=True)
    s.add_argument("--n", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--law", help="also assign edge lengths from this law")
    s.add_argument("--length-seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_generate)

    s = sub.add_parser("distances", help="run a distance experiment")
    s.add_argument("--config", required=True)
    s.add_argument("--workers", type=int)
    s.add_argument("--output")
    s.add_argument("--force", action="store_true", help="run even when the SFP guard fires")
    s.set_defaults(fn=cmd_distances)

    s = sub.add_parser("criterion", help="classify an edge-length law")
    s.add_argument("--law", required=True)
    s.add_argument("--k-max", type=int, default=10)
    s.add_argument("--tau", type=float)
    s.add_argument("--out")
    s.set_defaults(fn=cmd_criterion)

    s = sub.add_parser("percolate", help="weight-dependent percolation of a graph file")
    s.add_argument("--graph", required=True)
    s.add_argument("--c", type=float, required=True)
    s.add_argument("--gamma-tilde", type=float, default=0.5)
    s.add_argument("--law", required=True)
    s.add_argument("--length-seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_percolate)

    s = sub.add_parser("boxing", help="boxing-system report for a graph file")
    s.add_argument("--graph", required=True)
    s.add_argument("--mu", type=float, required=True)
    s.add_argument("--epsilon", type=float, default=0.1)
    s.add_argument("--tau", type=float, default=2.5)
    s.add_argument("--center", help="comma separated coordinates (default: origin)")
    s.add_argument("--out")
    s.set_defaults(fn=cmd_boxing)

    s = sub.add_parser("brw", help="simulate the Bernoulli branching random walk")
    s.add_argument("--d", type=int, default=2)
    s.add_argument("--tau", type=float, default=2.5)
    s.add_argument("--alpha", type=float, default=1.95)
    s.add_argument("--lam", type=float, default=1.0)
    s.add_argument("--n", type=float, default=1000.0, help="window volume")
    s.add_argument("--side", type=float)
    s.add_argument("--root", type=int, default=0)
    s.add_argument("--max-gen", type=int, default=3)
    s.add_argument("--cap", type=int, default=1_000_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(fn=cmd_brw)

    s = sub.add_parser("report", help="summarize a distance CSV")
    s.add_argument("--input", required=True)
    s.add_argument("--ecdf", help="path stem for ECDF CSVs")
    s.add_argument("--out")
    s.set_defaults(fn=cmd_report)
    return ap


def main(argv=None) -> int:
    from ._engine import ResourceCapError
    from .config import ConfigError

    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.fn(args)
    except ResourceCapError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ConfigError, ValueError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
