"""Empirical law of the smallest admissible envelope index i for the BerBRW."""
import argparse
import collections
import math

from girgfpp.brw import brw_environment, envelope_check, simulate_berbrw
from girgfpp.genmodel import GirgParams


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--volume", type=float, default=500.0)
    ap.add_argument("--runs", type=int, default=500)
    ap.add_argument("--max-gen", type=int, default=3)
    ap.add_argument("--eps", default="0.05,0.1,0.2")
    a = ap.parse_args()
    p = GirgParams(d=2, tau=2.5, alpha=1.95)
    env = brw_environment(p, 1.0, math.sqrt(a.volume), 0)
    runs = [simulate_berbrw(env, s % len(env), a.max_gen, 10 ** 6, p, s) for s in range(a.runs)]
    for eps in (float(e) for e in a.eps.split(",")):
        hist = collections.Counter(envelope_check(r, eps, p.tau, p.alpha, p.d).i for r in runs)
        print(f"eps={eps}: " + ", ".join(f"i={i}: {c}" for i, c in sorted(hist.items(), key=lambda t: (t[0] is None, t[0]))))


if __name__ == "__main__":
    main()
