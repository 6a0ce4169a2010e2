"""Optimized guesswork leakage of erasure sources as |U| grows, against the construction and the closed form."""

import argparse
import csv
import math
import sys
import time

from guessleak.constructions import bes_construction_value
from guessleak.leakage import mgl_bes_closed_form
from guessleak.optimize import GuessworkRatio, OptimizerConfig, maximize_u_channel, seeded_bes_channel
from guessleak.prob_core import erasure_source


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=float, action="append", help="erasure probability (repeatable)")
    ap.add_argument("--u-size", type=int, action="append", help="even |U| (repeatable)")
    ap.add_argument("--restarts", type=int, default=16)
    ap.add_argument("--max-iters", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()
    ps = args.p or [0.0, 0.25, 0.5, 0.75]
    sizes = args.u_size or [2, 4, 8, 12, 16]

    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(out)
    w.writerow(["p", "u_size", "closed_form", "construction", "optimized", "gap", "converged", "seconds"])
    for p in ps:
        j = erasure_source(p)
        target = mgl_bes_closed_form(p)
        for n in sizes:
            cfg = OptimizerConfig(restarts=args.restarts, max_iters=args.max_iters, u_size=n, seed=args.seed)
            t0 = time.perf_counter()
            res = maximize_u_channel(j, GuessworkRatio(), cfg, [seeded_bes_channel(n)])
            dt = time.perf_counter() - t0
            w.writerow([p, n, f"{target:.10g}", f"{math.log(bes_construction_value(n, p)):.10g}",
                        f"{res.best_value:.10g}", f"{target - res.best_value:.6g}", res.converged, f"{dt:.2f}"])
            out.flush()
    if out is not sys.stdout:
        out.close()


if __name__ == "__main__":
    main()
