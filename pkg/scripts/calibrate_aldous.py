"""Fix the gap threshold used by the Aldous-approximation acceptance check.

The rule is set before looking at any acceptance run: draw 200 approximants
of the Y-tree (n = 2000, rank timing) from seeds disjoint from the ones the
test uses, take the 99th percentile of their graph distance to the rescaled
minimal coding, multiply by 1.5 and round up to 3 decimals.

    python3 scripts/calibrate_aldous.py [--runs 200] [--out scripts/aldous_calibration.json]
"""
import argparse
import json
import math
import random
import time
from fractions import Fraction

import numpy as np

from dendrocode.codec import aldous_height, encode, graph_distance
from dendrocode.random_gen import y_tree

N = 2000
SEED_PREFIX = "calibration"
MARGIN = 1.5


def gap(seed: str) -> float:
    S = y_tree()
    target = encode(S).time_scaled(1 / S.total_mass)
    approx = aldous_height(S, N, random.Random(seed), timing="rank")
    return graph_distance(approx, target)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=200)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    start = time.time()
    gaps = np.array([gap(f"{SEED_PREFIX}/{i}") for i in range(args.runs)])
    q99 = float(np.quantile(gaps, 0.99))
    threshold = math.ceil(MARGIN * q99 * 1000) / 1000
    result = {
        "n": N,
        "runs": args.runs,
        "seed_prefix": SEED_PREFIX,
        "mean": float(gaps.mean()),
        "max": float(gaps.max()),
        "q99": q99,
        "margin": MARGIN,
        "threshold": threshold,
        "seconds": round(time.time() - start, 1),
    }
    print(json.dumps(result, indent=2))
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(result, fh, indent=2)
            fh.write("\n")


if __name__ == "__main__":
    main()
