"""Epochs-to-threshold comparisons between tuned optimizers."""
import math
from dataclasses import dataclass, replace

from .runner import Case, run_one


def first_epoch_below(outcome, threshold: float):
    """First epoch whose score is at most ``threshold``, or None."""
    for row in outcome.rows:
        if row.gap_or_test_mse is not None and row.gap_or_test_mse <= threshold:
            return row.epoch
    return None


def score_at(outcome, epoch: int) -> float:
    """Score after ``epoch`` epochs; inf if the run failed or ended earlier without converging."""
    for row in outcome.rows:
        if row.epoch == epoch:
            return row.gap_or_test_mse
    if outcome.status == "converged" and outcome.rows:
        return outcome.rows[-1].gap_or_test_mse
    return math.inf


@dataclass
class Tuned:
    optimizer: str
    seed: int
    alpha: float | None
    epochs: int | None  # first epoch at or below the threshold
    outcomes: dict  # alpha -> RunOutcome


def with_epochs(case: Case, max_epochs: int) -> Case:
    return replace(case, config=replace(case.config, max_epochs=max_epochs))


def fastest_alpha(case: Case, optimizer: str, seed: int, threshold: float, max_epochs: int) -> Tuned:
    """Run the alpha grid until the score reaches ``threshold``; keep the fastest alpha.

    Alphas run from largest to smallest and each run is capped at the best
    epoch count found so far, since a slower run cannot win. Ties go to the
    larger alpha. ``epochs`` is None when no alpha gets there.
    """
    outcomes, best_e, best_a = {}, max_epochs, None
    for alpha in sorted(case.config.alpha_grid, reverse=True):
        out = run_one(with_epochs(case, best_e), optimizer, seed, alpha, stop_below=threshold)
        outcomes[alpha] = out
        e = first_epoch_below(out, threshold)
        if e is not None and (best_a is None or e < best_e):
            best_e, best_a = e, alpha
    return Tuned(optimizer, seed, best_a, best_e if best_a is not None else None, outcomes)


def best_score_at(case: Case, optimizer: str, seed: int, epochs: int):
    """``(score, alpha)`` of the best alpha after exactly ``epochs`` epochs."""
    case = with_epochs(case, epochs)
    scored = [(score_at(run_one(case, optimizer, seed, a), epochs), a) for a in sorted(case.config.alpha_grid)]
    return min(scored, key=lambda t: t[0])
