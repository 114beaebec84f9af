from .batch import rlbfgs_run, rsd_run
from .memory import CurvaturePair, QnMemory, curvature_update, two_loop_apply
from .result import EpochRecord, RunResult
from .schedule import StepSchedule
from .stochastic import (
    OptimizerConfig,
    Snapshot,
    rsgd_run,
    rsgd_step,
    sqnvr_modified_grad,
    sqnvr_run,
    svrg_modified_grad,
    svrg_run,
)

__all__ = [
    "CurvaturePair",
    "EpochRecord",
    "OptimizerConfig",
    "QnMemory",
    "RunResult",
    "Snapshot",
    "StepSchedule",
    "curvature_update",
    "rlbfgs_run",
    "rsd_run",
    "rsgd_run",
    "rsgd_step",
    "sqnvr_modified_grad",
    "sqnvr_run",
    "svrg_modified_grad",
    "svrg_run",
    "two_loop_apply",
]
