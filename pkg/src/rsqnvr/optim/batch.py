"""Full-batch baselines: steepest descent with backtracking and Riemannian L-BFGS."""
import logging
import time

import numpy as np

from ..errors import LineSearchFailed
from .linesearch import armijo, strong_wolfe
from .memory import QnMemory, curvature_update, two_loop_apply
from .result import EpochRecord, RunResult
from .stochastic import RUN_ERRORS, STOP, OptimizerConfig

log = logging.getLogger(__name__)


def _record(problem, x, f, g, k, evals, seconds, monitor):
    extra = monitor(x) if monitor is not None else {}
    return EpochRecord(k, evals, seconds, f, problem.manifold.norm(x, g), extra)


def rsd_run(problem, config: OptimizerConfig, w0, monitor=None) -> RunResult:
    """Riemannian steepest descent, Armijo backtracking on ``f(R_x(-a grad))``.

    One record per iteration. The first trial step is ``schedule.alpha`` and
    afterwards twice the previously accepted step.
    """
    M, N = problem.manifold, problem.N
    start = time.perf_counter()
    x = w0
    f, g = problem.cost(x), problem.grad(x)
    evals, elapsed, records = N, 0.0, []
    a0 = config.schedule.alpha
    status, message = "max_epochs", ""
    try:
        for k in range(config.max_epochs):
            if M.norm(x, g) <= config.grad_tol:
                status = "converged"
                break
            a, f, _ = armijo(lambda a: problem.cost(M.retract(x, -a * g)), f, -M.inner(x, g, g), a0)
            x = M.retract(x, -a * g)
            g = problem.grad(x)
            evals += N
            a0 = 2.0 * a
            elapsed += time.perf_counter() - start
            records.append(_record(problem, x, f, g, k + 1, evals, elapsed, monitor))
            start = time.perf_counter()
            if records[-1].grad_norm <= config.grad_tol:
                status = "converged"
                break
            if records[-1].extra.pop(STOP, False):
                status, message = "stopped", "monitor requested stop"
                break
    except LineSearchFailed as exc:
        status, message = "linesearch_failed", str(exc)
    except RUN_ERRORS as exc:
        status, message = "aborted", f"{type(exc).__name__}: {exc}"
        log.warning("rsd run aborted: %s", message)
    return RunResult(x, records, status, message)


def rlbfgs_run(problem, config: OptimizerConfig, w0, monitor=None) -> RunResult:
    """Riemannian L-BFGS with a strong Wolfe line search.

    Uses the same memory, cautious test and pair transport as R-SQN-VR, but
    driven by full gradients at every iterate. ``phi'(a)`` is evaluated
    with the velocity of the retraction curve.
    """
    M, N = problem.manifold, problem.N
    start = time.perf_counter()
    x = w0
    f, g = problem.cost(x), problem.grad(x)
    evals, elapsed, records = N, 0.0, []
    memory = QnMemory(M, config.memory, base=x)
    status, message = "max_epochs", ""
    try:
        for k in range(config.max_epochs):
            gnorm = M.norm(x, g)
            if gnorm <= config.grad_tol:
                status = "converged"
                break
            d = -two_loop_apply(memory, g)
            slope = M.inner(x, g, d)
            if not slope < 0:
                memory.clear()
                d, slope = -g, -gnorm**2
            a0 = 1.0 if len(memory) else min(1.0, 1.0 / gnorm)

            def phi_dphi(a, x=x, d=d):
                y = M.retract(x, a * d)
                gy = problem.grad(y)
                vel = M.retract_velocity(x, a * d) / a
                return problem.cost(y), M.inner(y, gy, vel), (y, gy)

            a, f, (y, gy), n = strong_wolfe(phi_dphi, f, slope, a0)
            evals += n * N
            curvature_update(memory, x, y, g, gy, config.cautious_eps, eta=a * d)
            x, g = y, gy
            elapsed += time.perf_counter() - start
            records.append(_record(problem, x, f, g, k + 1, evals, elapsed, monitor))
            start = time.perf_counter()
            if records[-1].grad_norm <= config.grad_tol:
                status = "converged"
                break
            if records[-1].extra.pop(STOP, False):
                status, message = "stopped", "monitor requested stop"
                break
    except LineSearchFailed as exc:
        status, message = "linesearch_failed", str(exc)
    except RUN_ERRORS as exc:
        status, message = "aborted", f"{type(exc).__name__}: {exc}"
        log.warning("rlbfgs run aborted: %s", message)
    if not np.isfinite(f):
        status = "aborted"
    return RunResult(x, records, status, message)
