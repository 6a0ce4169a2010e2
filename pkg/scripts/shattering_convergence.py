"""Worst gap between shattering log-ratios and D_inf over random joints, per cost function and block size m."""

import argparse
import csv
import math
import sys

import numpy as np

from guessleak.constructions import shattering_log_ratio
from guessleak.guessing import CostH
from guessleak.leakage import pointwise_guesswork_leakage
from guessleak.prob_core import JointSource

COSTS = {
    "power0.5": CostH.power(0.5),
    "power1": CostH.power(1),
    "power2": CostH.power(2),
    "log": CostH.log(),
    "geometric2": CostH.geometric(2),
}


def random_finite_joints(rng, count, max_x, max_y):
    out = []
    while len(out) < count:
        nx, ny = rng.integers(2, max_x + 1), rng.integers(2, max_y + 1)
        j = JointSource.of(rng.dirichlet(np.ones(nx * ny)).reshape(nx, ny))
        if all(math.isfinite(pointwise_guesswork_leakage(j, y)) for y in j.admissible_outputs()):
            out.append(j)
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--joints", type=int, default=50)
    ap.add_argument("--max-x", type=int, default=4)
    ap.add_argument("--max-y", type=int, default=4)
    ap.add_argument("--m", type=int, action="append", help="block size (repeatable)")
    ap.add_argument("--cost", choices=sorted(COSTS), action="append")
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()
    ms = args.m or [10, 100, 1000, 10**4, 10**5, 10**6]
    costs = args.cost or list(COSTS)

    joints = random_finite_joints(np.random.default_rng(args.seed), args.joints, args.max_x, args.max_y)
    pairs = [(j, y, pointwise_guesswork_leakage(j, y)) for j in joints for y in j.admissible_outputs()]

    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(out)
    w.writerow(["cost", "m", "max_gap", "mean_gap"])
    for name in costs:
        h = COSTS[name]
        for m in ms:
            gaps = np.array([d - shattering_log_ratio(j, y, h, m) for j, y, d in pairs])
            w.writerow([name, m, f"{gaps.max():.6g}", f"{gaps.mean():.6g}"])
            out.flush()
    if out is not sys.stdout:
        out.close()


if __name__ == "__main__":
    main()
