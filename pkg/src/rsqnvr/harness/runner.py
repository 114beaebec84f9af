"""Run an experiment case: build the problem, sweep optimizers x alphas x seeds, emit rows."""
import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import LineSearchFailed, RsqnError
from ..linalg import sym
from ..manifolds.spd import spd_exp, spd_log
from ..optim import OptimizerConfig, rlbfgs_run, rsd_run, rsgd_run, sqnvr_run, svrg_run
from ..optim.stochastic import STOP
from ..problems import KarcherProblem, synth_lowrank
from .config import STOCHASTIC, ExperimentConfig
from .ingest import ingest_ratings
from .metrics import MetricRow, write_csv

log = logging.getLogger(__name__)

RUNNERS = {"rsgd": rsgd_run, "rsvrg": svrg_run, "rsqnvr": sqnvr_run, "rsd": rsd_run, "rlbfgs": rlbfgs_run}
REFERENCE_TOL = 1e-12
REFERENCE_ITERS = 500
RUNS_HEADER = ("optimizer", "seed", "alpha", "status", "epochs", "final_metric", "best_alpha", "message")


def karcher_reference(problem: KarcherProblem, tol: float = REFERENCE_TOL):
    """High-accuracy Karcher mean ``(w*, f*)`` by full-batch R-L-BFGS.

    Starts from the log-Euclidean mean, which is deterministic and already
    close for moderate spread.
    """
    M = problem.manifold
    eye = np.eye(problem.d)
    w0 = spd_exp(eye, np.mean([spd_log(eye, Q) for Q in problem.Q], axis=0))
    cfg = OptimizerConfig(memory=4, max_epochs=REFERENCE_ITERS, grad_tol=tol)
    res = rlbfgs_run(problem, cfg, sym(w0))
    gnorm = res.records[-1].grad_norm if res.records else M.norm(w0, problem.grad(w0))
    if gnorm > tol:
        raise LineSearchFailed(f"reference solve stopped at grad norm {gnorm:.3e} ({res.status}: {res.message})")
    return res.w, problem.cost(res.w)


@dataclass
class Case:
    """A built problem plus how to score an iterate on it."""

    problem: object
    config: ExperimentConfig
    fstar: float | None = None
    test: object = None
    validation: object = None

    def initial_point(self, seed: int):
        # separate stream from the optimizer's sampling generator
        return self.problem.manifold.random_point(np.random.default_rng([seed, 7919]))

    def scores(self, w):
        """``(gap_or_test_mse, train_mse)`` for an iterate."""
        if self.fstar is not None:
            return self.problem.cost(w) - self.fstar, None
        coeffs = self.problem.coefficients(w)
        return self.problem.mse(w, self.test, coeffs), self.problem.train_mse(w, coeffs)

    def monitor(self, stop_below: float | None = None):
        """Per-epoch scorer; requests a stop on validation increase (early_stop) or at ``stop_below``."""
        state = {"best": math.inf}

        def watch(w):
            score, train = self.scores(w)
            out = {"score": score, "train": train}
            if stop_below is not None and score <= stop_below:
                out[STOP] = True
            if self.config.early_stop and self.validation is not None and len(self.validation):
                val = self.problem.mse(w, self.validation)
                if val > state["best"]:
                    out[STOP] = True
                state["best"] = min(state["best"], val)
            return out

        return watch


def build_case(cfg: ExperimentConfig) -> Case:
    flavor = cfg.flavor()
    if cfg.case == "karcher":
        rng = np.random.default_rng(cfg.problem_seed)
        problem = KarcherProblem.random(cfg.d, cfg.N, rng, spread=cfg.spread, flavor=flavor)
        _, fstar = karcher_reference(problem)
        return Case(problem, cfg, fstar=fstar)
    if cfg.case == "mc":
        inst = synth_lowrank(cfg.d, cfg.N, cfg.r, cfg.os, cfg.cn, cfg.sigma, cfg.problem_seed, flavor=flavor)
        return Case(inst.problem, cfg, test=inst.test)
    data = ingest_ratings(cfg.data_path, cfg.split_seed, r=cfg.r, flavor=flavor)
    return Case(data.problem, cfg, test=data.test, validation=data.validation)


@dataclass
class RunOutcome:
    optimizer: str
    seed: int
    alpha: float | None
    rows: list
    status: str
    message: str

    @property
    def final(self) -> float:
        if self.status not in ("converged", "max_epochs", "stopped") or not self.rows:
            return math.inf
        v = self.rows[-1].gap_or_test_mse
        return math.inf if v is None or not math.isfinite(v) else v


def run_one(case: Case, optimizer: str, seed: int, alpha: float | None,
            stop_below: float | None = None) -> RunOutcome:
    cfg = case.config
    problem = case.problem
    ocfg = cfg.optimizer_config(problem.N, alpha if alpha is not None else 1.0, seed, optimizer)
    try:
        w0 = case.initial_point(seed)
        res = RUNNERS[optimizer](problem, ocfg, w0, case.monitor(stop_below))
    except RsqnError as exc:
        log.warning("%s seed=%s alpha=%s failed: %s", optimizer, seed, alpha, exc)
        return RunOutcome(optimizer, seed, alpha, [], "error", f"{type(exc).__name__}: {exc}")
    rows = [
        MetricRow(optimizer, seed, alpha, rec.epoch, rec.grad_evals,
                  rec.seconds if cfg.timing else None, rec.cost,
                  rec.extra.get("score"), rec.extra.get("train"), rec.grad_norm)
        for rec in res.records
    ]
    log.info("%s seed=%s alpha=%s: %s after %d epochs", optimizer, seed, alpha, res.status, len(rows))
    return RunOutcome(optimizer, seed, alpha, rows, res.status, res.message)


def _task(args):
    return run_one(*args)


def best_alphas(outcomes) -> dict:
    """Per stochastic optimizer, the alpha with the smallest median final metric (ties: smaller alpha)."""
    best = {}
    for opt in {o.optimizer for o in outcomes if o.alpha is not None}:
        by_alpha = {}
        for o in outcomes:
            if o.optimizer == opt:
                by_alpha.setdefault(o.alpha, []).append(o.final)
        best[opt] = min(sorted(by_alpha), key=lambda a: float(np.median(by_alpha[a])))
    return best


def run_case(cfg: ExperimentConfig, out_dir=None, parallel: int = 1, case: Case | None = None):
    """Run every (optimizer, alpha, seed); write the metric CSV and a per-run summary.

    Returns ``(rows, outcomes, best)``. Rows are ordered by optimizer (config
    order), alpha (grid order), seed, epoch, independent of ``parallel``.
    """
    case = case or build_case(cfg)
    tasks = []
    for opt in cfg.optimizers:
        alphas = cfg.alpha_grid if opt in STOCHASTIC else [None]
        for alpha in alphas:
            for seed in cfg.seeds:
                tasks.append((case, opt, seed, alpha))
    if parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            outcomes = list(pool.map(_task, tasks))
    else:
        outcomes = [_task(t) for t in tasks]
    best = best_alphas(outcomes)
    rows = [row for o in outcomes for row in o.rows]
    if out_dir is not None or cfg.output:
        path = Path(out_dir or ".") / cfg.output
        path.parent.mkdir(parents=True, exist_ok=True)
        write_csv(path, rows)
        write_runs(path.with_suffix(".runs.csv"), outcomes, best)
    return rows, outcomes, best


def write_runs(path, outcomes, best):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RUNS_HEADER)
        for o in outcomes:
            flag = "" if o.alpha is None else str(best.get(o.optimizer) == o.alpha).lower()
            w.writerow([o.optimizer, o.seed, "NA" if o.alpha is None else repr(o.alpha), o.status,
                        len(o.rows), repr(o.final), flag, o.message])

