"""Experiment configuration: a flat ``key = value`` text file with ``#`` comments."""
from dataclasses import dataclass, field, fields
from pathlib import Path

from ..errors import ConfigInvalid
from ..manifolds import SPD, GeometryFlavor, Grassmann
from ..optim import OptimizerConfig, StepSchedule

CASES = ("karcher", "mc", "movielens")
STOCHASTIC = ("rsgd", "rsvrg", "rsqnvr")
BATCH = ("rsd", "rlbfgs")
OPTIMIZERS = STOCHASTIC + BATCH

_LISTS = {"optimizers": str, "alpha_grid": float, "seeds": int}


@dataclass
class ExperimentConfig:
    case: str = "karcher"
    # problem
    d: int = 3
    N: int = 100
    r: int = 5
    os: float = 8.0
    cn: float = 50.0
    sigma: float = 1e-10
    spread: float = 1.0
    problem_seed: int = 0
    data_path: str = ""
    split_seed: int = 0
    # optimizers
    optimizers: list = field(default_factory=lambda: list(STOCHASTIC))
    inner_mult: float = 3.0
    inner_iters: int = 0
    batch: int = 1
    memory: int = 4
    cautious_eps: float = 1e-4
    alpha_grid: list = field(default_factory=lambda: [1e-5, 1e-4, 1e-3, 1e-2, 1e-1])
    decay: float = 1e-3
    max_epochs: int = 10
    batch_iters: int = 60
    batch_alpha: float = 1.0
    grad_tol: float = 1e-8
    snapshot: str = "II_last"
    output_option: str = "III_final"
    retraction: str = ""
    transport: str = ""
    early_stop: bool = False
    # run control
    seeds: list = field(default_factory=lambda: [0])
    timing: bool = True
    output: str = "results.csv"

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.case not in CASES:
            raise ConfigInvalid(f"case must be one of {CASES}, got {self.case!r}")
        if not self.optimizers:
            raise ConfigInvalid("optimizer list is empty")
        bad = [o for o in self.optimizers if o not in OPTIMIZERS]
        if bad:
            raise ConfigInvalid(f"unknown optimizers {bad}; choose from {OPTIMIZERS}")
        if len(set(self.optimizers)) != len(self.optimizers):
            raise ConfigInvalid("optimizer list has duplicates")
        if not self.seeds:
            raise ConfigInvalid("seed list is empty")
        if any(o in STOCHASTIC for o in self.optimizers):
            if not self.alpha_grid or any(not a > 0 for a in self.alpha_grid):
                raise ConfigInvalid("alpha_grid must be a nonempty list of positive numbers")
        for name in ("d", "N", "batch", "memory", "max_epochs", "batch_iters"):
            if getattr(self, name) < 1:
                raise ConfigInvalid(f"{name} must be >= 1")
        if self.case == "mc" and not 1 <= self.r <= min(self.d, self.N):
            raise ConfigInvalid("r must satisfy 1 <= r <= min(d, N)")
        if self.case == "movielens" and not self.data_path:
            raise ConfigInvalid("movielens case needs data_path")
        if self.inner_iters < 0 or self.inner_mult < 0 or (self.inner_iters == 0 and self.inner_mult == 0):
            raise ConfigInvalid("set inner_iters or a positive inner_mult")
        if self.decay < 0 or not self.cautious_eps > 0 or self.grad_tol < 0:
            raise ConfigInvalid("decay, cautious_eps and grad_tol must be non-negative (cautious_eps positive)")
        try:
            self.optimizer_config(self.N, 1e-3, 0)
            self.flavor()
        except ValueError as exc:
            raise ConfigInvalid(str(exc)) from exc

    def m(self, N: int) -> int:
        """Inner iterations per epoch: explicit ``inner_iters`` or ``inner_mult * N``."""
        return self.inner_iters if self.inner_iters else max(1, round(self.inner_mult * N))

    def flavor(self) -> GeometryFlavor | None:
        if not (self.retraction or self.transport):
            return None
        manifold = SPD if self.case == "karcher" else Grassmann
        default = GeometryFlavor(manifold.valid_retractions[0], manifold.valid_transports[0])
        flavor = GeometryFlavor(self.retraction or default.retraction, self.transport or default.transport)
        if flavor.retraction not in manifold.valid_retractions:
            raise ValueError(f"unknown retraction {flavor.retraction!r} for case {self.case}")
        if flavor.transport not in manifold.valid_transports:
            raise ValueError(f"unknown transport {flavor.transport!r} for case {self.case}")
        return flavor

    def optimizer_config(self, N: int, alpha: float, seed: int, optimizer: str = "rsqnvr") -> OptimizerConfig:
        if optimizer in BATCH:
            return OptimizerConfig(
                memory=self.memory, cautious_eps=self.cautious_eps,
                schedule=StepSchedule("fixed", self.batch_alpha),
                max_epochs=self.batch_iters, grad_tol=self.grad_tol, seed=seed)
        kind = "decaying" if optimizer == "rsgd" else "fixed"
        return OptimizerConfig(
            inner_iters=self.m(N), batch_size=self.batch, memory=self.memory,
            cautious_eps=self.cautious_eps, schedule=StepSchedule(kind, alpha, self.decay),
            snapshot=self.snapshot, output=self.output_option,
            max_epochs=self.max_epochs, grad_tol=self.grad_tol, seed=seed)


def _convert(name, raw, kind):
    if name in _LISTS:
        item = _LISTS[name]
        parts = [p.strip() for p in raw.split(",") if p.strip()]
        return [item(p) for p in parts]
    if kind is bool:
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if kind is int:
        return int(raw)
    if kind is float:
        return float(raw)
    return raw


def parse_config(text: str, **overrides) -> ExperimentConfig:
    """Parse ``key = value`` lines. Unknown or repeated keys are errors."""
    kinds = {f.name: (f.type if not isinstance(f.type, str) else eval(f.type)) for f in fields(ExperimentConfig)}
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if not sep or not key:
            raise ConfigInvalid(f"line {lineno}: expected 'key = value'")
        if key not in kinds:
            raise ConfigInvalid(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigInvalid(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _convert(key, raw, kinds[key])
        except ValueError as exc:
            raise ConfigInvalid(f"line {lineno}: bad value for {key}: {exc}") from exc
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values)


def load_config(path, **overrides) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, **overrides)
