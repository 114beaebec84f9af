"""Stochastic optimizers: R-SGD, R-SVRG and R-SQN-VR.

All three share one epoch loop. An epoch is ``inner_iters`` stochastic
steps; after it the loop records one :class:`EpochRecord`. The variance
reduced methods keep a reference point (the snapshot) with its full
gradient; R-SQN-VR additionally keeps an L-BFGS memory whose pairs all live
in the snapshot's tangent space.
"""
import logging
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import GeometryError
from .memory import QnMemory, curvature_update, two_loop_apply
from .result import EpochRecord, RunResult
from .schedule import StepSchedule

log = logging.getLogger(__name__)

# per-sample snapshot gradients are cached when they fit in this many floats
SNAPSHOT_CACHE_LIMIT = 20_000_000
RUN_ERRORS = (GeometryError, np.linalg.LinAlgError, FloatingPointError)
# a monitor returning {STOP: True} ends the run after the current record
STOP = "stop"


@dataclass
class OptimizerConfig:
    inner_iters: int = 100
    batch_size: int = 1
    memory: int = 10
    cautious_eps: float = 1e-4
    schedule: StepSchedule = field(default_factory=StepSchedule)
    snapshot: str = "II_last"
    output: str = "III_final"
    max_epochs: int = 10
    grad_tol: float = 1e-8
    seed: int = 0
    snapshot_cache: bool | None = None

    def __post_init__(self):
        if self.inner_iters < 1:
            raise ValueError("inner_iters must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.memory < 1:
            raise ValueError("memory must be >= 1")
        if not self.cautious_eps > 0:
            raise ValueError("cautious_eps must be positive")
        if self.snapshot not in ("II_last", "I_random_t"):
            raise ValueError(f"unknown snapshot option {self.snapshot!r}")
        if self.output not in ("III_final", "IV_random"):
            raise ValueError(f"unknown output option {self.output!r}")


class Snapshot:
    """Reference point with its full gradient and, optionally, per-sample gradients."""

    def __init__(self, problem, w, cache: bool | None = None):
        self.w = w
        if cache is None:
            cache = problem.N * np.size(w) <= SNAPSHOT_CACHE_LIMIT
        if cache:
            self.samples = problem.sample_grads(w)
            self.full = problem.manifold.proj(w, self.samples.mean(axis=0))
        else:
            self.samples = None
            self.full = problem.grad(w)

    def batch_grad(self, problem, batch):
        if self.samples is None:
            return problem.grad(self.w, batch)
        batch = np.asarray(batch)
        return self.samples[np.sort(batch)].sum(axis=0) / batch.size


def _sampler(seed):
    # counter-based generators: the inner-loop stream and the option stream never overlap
    bits = np.random.Philox(seed)
    return np.random.Generator(bits), np.random.Generator(bits.jumped())


def rsgd_step(problem, w, batch, alpha):
    """One R-SGD update ``R_w(-alpha grad f_batch(w))``."""
    return problem.manifold.retract(w, -alpha * problem.grad(w, batch))


def svrg_modified_grad(problem, snap: Snapshot, w_t, batch, eta=None):
    """``grad f_b(w_t) - T_eta(grad f_b(w~) - grad f(w~))``, a tangent at ``w_t``."""
    M = problem.manifold
    correction = snap.batch_grad(problem, batch) - snap.full
    g = problem.grad(w_t, batch)
    if w_t is snap.w:
        return g - correction
    if eta is None and M.transport_uses_eta:
        eta = M.inverse_retract(snap.w, w_t)
    return g - M.transport(snap.w, eta, correction, dest=w_t)


def sqnvr_modified_grad(problem, snap: Snapshot, w_t, batch, eta=None):
    """Variance-reduced gradient expressed at the snapshot.

    Returns ``(xi, eta)`` with ``eta = R^{-1}_{w~}(w_t)`` and
    ``xi = T_eta^{-1} grad f_b(w_t) - (grad f_b(w~) - grad f(w~))``.
    ``eta`` is None when the transport does not use it.
    """
    M = problem.manifold
    correction = snap.batch_grad(problem, batch) - snap.full
    g = problem.grad(w_t, batch)
    if w_t is snap.w:
        return g - correction, M.zero(w_t)
    if eta is None and M.transport_uses_eta:
        eta = M.inverse_retract(snap.w, w_t)
    return M.inverse_transport(snap.w, eta, g, dest=w_t) - correction, eta


def _epoch_record(problem, w, full_grad, epoch, evals, seconds, monitor):
    M = problem.manifold
    extra = monitor(w) if monitor is not None else {}
    return EpochRecord(epoch, evals, seconds, problem.cost(w), M.norm(w, full_grad), extra)


def _run(problem, config: OptimizerConfig, w0, method: str, monitor=None) -> RunResult:
    M, N, b, m = problem.manifold, problem.N, config.batch_size, config.inner_iters
    rng, opt_rng = _sampler(config.seed)
    records = []
    elapsed = 0.0
    start = time.perf_counter()
    snap = Snapshot(problem, w0, config.snapshot_cache) if method != "rsgd" else None
    evals = N if snap is not None else 0
    memory = QnMemory(M, config.memory, base=w0) if method == "rsqnvr" else None
    w_out, n_seen = w0, 0
    status, message = "max_epochs", ""
    w_ref = w0
    try:
        for k in range(config.max_epochs):
            alpha = config.schedule(k)
            pick = opt_rng.integers(1, m + 1) if config.snapshot == "I_random_t" else m
            w, w_pick = w_ref, None
            for t in range(m):
                batch = rng.integers(0, N, size=b)
                if method == "rsgd":
                    d = problem.grad(w, batch)
                    evals += b
                elif method == "rsqnvr" and k >= 1:
                    xi, eta = sqnvr_modified_grad(problem, snap, w, batch)
                    h = two_loop_apply(memory, xi)
                    d = h if w is snap.w else M.transport(snap.w, eta, h, dest=w)
                    evals += 2 * b
                else:
                    d = svrg_modified_grad(problem, snap, w, batch)
                    evals += 2 * b
                w = M.retract(w, -alpha * d)
                if t + 1 == pick:
                    w_pick = w
                if config.output == "IV_random":
                    n_seen += 1
                    if opt_rng.random() * n_seen < 1.0:
                        w_out = w
            w_ref = w_pick
            if method == "rsgd":
                full = problem.grad(w_ref)
            else:
                new = Snapshot(problem, w_ref, config.snapshot_cache)
                evals += N
                if memory is not None:
                    curvature_update(memory, snap.w, new.w, snap.full, new.full, config.cautious_eps)
                snap = new
                full = snap.full
            elapsed += time.perf_counter() - start
            rec = _epoch_record(problem, w_ref, full, k + 1, evals, elapsed, monitor)
            records.append(rec)
            start = time.perf_counter()
            if not np.isfinite(rec.cost):
                status, message = "aborted", "cost is not finite"
                break
            if rec.grad_norm <= config.grad_tol:
                status = "converged"
                break
            if rec.extra.pop(STOP, False):
                status, message = "stopped", "monitor requested stop"
                break
    except RUN_ERRORS as exc:
        status, message = "aborted", f"{type(exc).__name__}: {exc}"
        log.warning("%s run aborted at epoch %d: %s", method, len(records) + 1, message)
    if config.output == "III_final" or n_seen == 0:
        w_out = w_ref
    return RunResult(w_out, records, status, message)


def rsgd_run(problem, config: OptimizerConfig, w0, monitor: Callable | None = None) -> RunResult:
    return _run(problem, config, w0, "rsgd", monitor)


def svrg_run(problem, config: OptimizerConfig, w0, monitor: Callable | None = None) -> RunResult:
    return _run(problem, config, w0, "rsvrg", monitor)


def sqnvr_run(problem, config: OptimizerConfig, w0, monitor: Callable | None = None) -> RunResult:
    return _run(problem, config, w0, "rsqnvr", monitor)
