"""Epochs each optimizer needs to reach a metric threshold, alpha tuned per seed.

Example: python scripts/epochs_to_threshold.py configs/mc_s3.cfg --threshold 1e-4
"""
import argparse

import numpy as np

from rsqnvr.harness import build_case, load_config
from rsqnvr.harness.threshold import fastest_alpha


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("config")
    parser.add_argument("--threshold", type=float, required=True)
    parser.add_argument("--max-epochs", type=int, default=None)
    args = parser.parse_args()

    cfg = load_config(args.config)
    case = build_case(cfg)
    cap = args.max_epochs or cfg.max_epochs
    for opt in cfg.optimizers:
        if opt not in ("rsgd", "rsvrg", "rsqnvr"):
            continue
        epochs = []
        for seed in cfg.seeds:
            tuned = fastest_alpha(case, opt, seed, args.threshold, cap)
            epochs.append(np.inf if tuned.epochs is None else tuned.epochs)
            print(f"{opt} seed {seed}: {tuned.epochs} epochs (alpha {tuned.alpha})", flush=True)
        print(f"{opt} median {np.median(epochs):g}")


if __name__ == "__main__":
    main()
