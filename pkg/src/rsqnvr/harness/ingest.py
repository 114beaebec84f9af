"""Ratings files (MovieLens ``u::i::r::t`` or ``u i r`` triples) to completion problems."""
import logging
import re
from typing import NamedTuple

import numpy as np

from ..errors import ConfigInvalid, ParseError
from ..problems import EntrySet, MatCompProblem

log = logging.getLogger(__name__)

_SPLIT = re.compile(r"[,\s]+")
TRAIN_FRACTION, VALIDATION_FRACTION = 0.8, 0.1


class Ratings(NamedTuple):
    problem: MatCompProblem
    validation: EntrySet
    test: EntrySet
    items: np.ndarray  # original 1-based item id of each problem column
    dropped: int  # items with no training rating


def parse_line(line: str, lineno: int):
    text = line.strip()
    parts = text.split("::") if "::" in text else _SPLIT.split(text)
    if len(parts) not in (3, 4):
        raise ParseError(f"expected 'user::item::rating::timestamp' or 'user item rating', got {text!r}", lineno)
    try:
        user, item, rating = int(parts[0]), int(parts[1]), float(parts[2])
    except ValueError as exc:
        raise ParseError(f"bad field in {text!r}: {exc}", lineno) from None
    if user < 1 or item < 1:
        raise ParseError("user and item ids are 1-based", lineno)
    if not np.isfinite(rating):
        raise ParseError("rating is not finite", lineno)
    return user, item, rating


def read_ratings(path):
    """Arrays ``(users, items, ratings)`` with 1-based ids; blank lines are skipped."""
    users, items, ratings, seen = [], [], [], {}
    with open(path, encoding="latin-1") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            u, i, r = parse_line(line, lineno)
            if (u, i) in seen:
                raise ParseError(f"duplicate rating for user {u}, item {i} (first on line {seen[u, i]})", lineno)
            seen[u, i] = lineno
            users.append(u)
            items.append(i)
            ratings.append(r)
    if not users:
        raise ParseError("no ratings found", None)
    return np.array(users), np.array(items), np.array(ratings, dtype=float)


def split_labels(n: int, split_seed: int) -> np.ndarray:
    """0/1/2 (train/validation/test) per rating from one seeded uniform draw each."""
    u = np.random.default_rng(split_seed).random(n)
    return np.where(u < TRAIN_FRACTION, 0, np.where(u < TRAIN_FRACTION + VALIDATION_FRACTION, 1, 2))


def ingest_ratings(path, split_seed: int, r: int = 10, ridge: float = 1e-12, flavor=None) -> Ratings:
    """Rows are users (``d = max user id``), columns items (``N = max item id``).

    Items without a training rating cannot be fitted; they are dropped (with
    their validation and test ratings) and the count is logged.
    """
    users, items, ratings = read_ratings(path)
    labels = split_labels(users.size, split_seed)
    d, N = int(users.max()), int(items.max())
    has_train = np.zeros(N + 1, dtype=bool)
    has_train[items[labels == 0]] = True
    kept = np.flatnonzero(has_train[1:]) + 1
    dropped = N - kept.size
    if dropped:
        lost = int(np.sum(~has_train[items]))
        log.info("dropped %d empty item columns (%d validation/test ratings)", dropped, lost)
    column = np.full(N + 1, -1)
    column[kept] = np.arange(kept.size)

    def entries(label):
        sel = (labels == label) & has_train[items]
        return EntrySet(users[sel] - 1, column[items[sel]], ratings[sel])

    if not 1 <= r <= min(d, kept.size):
        raise ConfigInvalid(f"rank r={r} needs 1 <= r <= min(users, items) = {min(d, kept.size)}")
    problem = MatCompProblem(d, kept.size, r, entries(0), ridge=ridge, flavor=flavor)
    return Ratings(problem, entries(1), entries(2), kept, dropped)
