"""Run every config in configs/ (or the ones given) through the CLI runner."""
import argparse
import sys
from pathlib import Path

from rsqnvr.harness.cli import main as cli

ROOT = Path(__file__).resolve().parent.parent


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("configs", nargs="*", help="config files (default: configs/*.cfg except movielens)")
    parser.add_argument("--out", default=str(ROOT / "results"))
    parser.add_argument("--seeds", default=None, help="override seed list, e.g. 0,1")
    parser.add_argument("--parallel", type=int, default=1)
    args = parser.parse_args()

    configs = args.configs or [str(p) for p in sorted((ROOT / "configs").glob("*.cfg")) if p.name != "mc_r.cfg"]
    failed = []
    for path in configs:
        print(f"== {path}", flush=True)
        argv = ["run", "--config", path, "--out", args.out, "--parallel", str(args.parallel)]
        if args.seeds:
            argv += ["--seeds", args.seeds]
        if cli(argv) != 0:
            failed.append(path)
    if failed:
        print("failed: " + ", ".join(failed))
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
