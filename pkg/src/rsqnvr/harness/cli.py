"""Command line entry point: ``run``, ``gen-synth`` and ``reference``."""
import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from ..errors import ConfigInvalid, InfeasibleSampling, RsqnError
from ..problems import synth_lowrank
from .config import load_config
from .runner import build_case, run_case

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2
LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


def _seeds(text):
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"seeds must be comma-separated integers, got {text!r}") from None


def build_parser():
    p = argparse.ArgumentParser(prog="rsqnvr", description="Riemannian stochastic QN experiments")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config and write metric CSVs")
    run.add_argument("--config", required=True)
    run.add_argument("--out", default=None, help="output directory (default: current)")
    run.add_argument("--seeds", type=_seeds, default=None, help="override the seed list, e.g. 0,1,2")
    run.add_argument("--parallel", type=int, default=1, help="worker processes")

    gen = sub.add_parser("gen-synth", help="write a synthetic low-rank completion instance")
    gen.add_argument("--d", type=int, required=True)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--r", type=int, required=True)
    gen.add_argument("--os", type=float, default=8.0)
    gen.add_argument("--cn", type=float, default=50.0)
    gen.add_argument("--sigma", type=float, default=1e-10)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, help="output .npz path")

    ref = sub.add_parser("reference", help="print the reference optimum f* of a Karcher config")
    ref.add_argument("--config", required=True)
    return p


def cmd_run(args):
    cfg = load_config(args.config, seeds=args.seeds)
    if args.parallel < 1:
        raise ConfigInvalid("--parallel must be >= 1")
    rows, outcomes, best = run_case(cfg, out_dir=args.out, parallel=args.parallel)
    failed = [o for o in outcomes if o.status in ("error", "aborted")]
    path = Path(args.out or ".") / cfg.output
    print(f"wrote {len(rows)} rows to {path}")
    for opt, alpha in sorted(best.items()):
        print(f"best alpha {opt}: {alpha!r}")
    if failed:
        print(f"{len(failed)} of {len(outcomes)} runs failed; see {path.with_suffix('.runs.csv')}")
    return EXIT_OK


def cmd_gen_synth(args):
    try:
        inst = synth_lowrank(args.d, args.n, args.r, args.os, args.cn, args.sigma, args.seed)
    except InfeasibleSampling as exc:
        raise ConfigInvalid(str(exc)) from exc
    P = inst.problem
    cols = np.repeat(np.arange(P.N), np.diff(P.colptr))
    np.savez(args.out, d=P.d, N=P.N, r=P.r, rows=P.rows, cols=cols, vals=P.vals,
             test_rows=inst.test.rows, test_cols=inst.test.cols, test_vals=inst.test.vals,
             left=inst.left, singular_values=inst.singular_values, right=inst.right)
    print(f"wrote {P.n_observed} training and {len(inst.test)} test entries to {args.out}")
    return EXIT_OK


def cmd_reference(args):
    cfg = load_config(args.config)
    if cfg.case != "karcher":
        raise ConfigInvalid("reference is defined for the karcher case only")
    case = build_case(cfg)
    print(repr(case.fstar))
    return EXIT_OK


COMMANDS = {"run": cmd_run, "gen-synth": cmd_gen_synth, "reference": cmd_reference}


def main(argv=None) -> int:
    level = os.environ.get("RSQN_LOG", "error").lower()
    logging.basicConfig(level=LOG_LEVELS.get(level, logging.ERROR), format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RsqnError, OSError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
