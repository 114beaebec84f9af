from dataclasses import dataclass


@dataclass(frozen=True)
class StepSchedule:
    """Step size per outer epoch: ``fixed`` or ``decaying`` as alpha / (1 + alpha * decay * k)."""

    kind: str = "fixed"
    alpha: float = 1e-2
    decay: float = 0.0

    def __post_init__(self):
        if self.kind not in ("fixed", "decaying"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.decay < 0:
            raise ValueError("decay must be non-negative")

    def __call__(self, epoch: int) -> float:
        if self.kind == "fixed":
            return self.alpha
        return self.alpha / (1.0 + self.alpha * self.decay * epoch)
