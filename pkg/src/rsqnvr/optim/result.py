from dataclasses import dataclass, field
from typing import Any


@dataclass
class EpochRecord:
    epoch: int
    grad_evals: int
    seconds: float
    cost: float
    grad_norm: float
    extra: dict = field(default_factory=dict)


@dataclass
class RunResult:
    w: Any
    records: list
    status: str = "max_epochs"
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status in ("converged", "max_epochs", "stopped")
