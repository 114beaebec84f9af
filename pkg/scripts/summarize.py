"""Median convergence curves and final metrics per optimizer at its best alpha."""
import argparse
import csv
import math
from collections import defaultdict
from pathlib import Path

import numpy as np

from rsqnvr.harness import read_csv


def best_alphas(runs_path):
    best = {}
    with open(runs_path, newline="") as fh:
        for rec in csv.DictReader(fh):
            if rec["best_alpha"] == "true":
                best[rec["optimizer"]] = float(rec["alpha"])
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csv", help="metric CSV written by `rsqnvr run`")
    parser.add_argument("--every", type=int, default=1, help="print every n-th epoch")
    args = parser.parse_args()

    path = Path(args.csv)
    rows = read_csv(path)
    best = best_alphas(path.with_suffix(".runs.csv"))
    curves = defaultdict(lambda: defaultdict(list))
    for row in rows:
        if row.alpha is None or best.get(row.optimizer) == row.alpha:
            curves[row.optimizer][row.epoch].append(row.gap_or_test_mse)

    for opt, by_epoch in curves.items():
        alpha = best.get(opt)
        print(f"{opt}" + (f" (alpha {alpha:g})" if alpha is not None else ""))
        epochs = sorted(by_epoch)
        for e in epochs:
            if e % args.every and e != epochs[-1]:
                continue
            vals = [v for v in by_epoch[e] if v is not None and math.isfinite(v)]
            med = f"{np.median(vals):.3e}" if vals else "NA"
            print(f"  epoch {e:4d}  median {med}  runs {len(vals)}")


if __name__ == "__main__":
    main()
