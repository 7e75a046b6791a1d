"""Participant-grouped data splits.

Swings from one person are correlated, so every split here operates on
whole participants: a participant is never on both sides of a fold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import BadFoldCountError, TooFewParticipantsError


@dataclass(frozen=True)
class FoldPlan:
    """Disjoint participant folds; iterate to get (train, held_out) pairs."""

    folds: tuple[tuple[str, ...], ...]

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for fold in self.folds:
            if not fold:
                raise ValueError("empty fold")
            for pid in fold:
                if pid in seen:
                    raise ValueError(f"participant {pid!r} appears in two folds")
                seen.add(pid)

    def __len__(self) -> int:
        return len(self.folds)

    def splits(self) -> Iterator[tuple[tuple[str, ...], tuple[str, ...]]]:
        for i, held_out in enumerate(self.folds):
            train = tuple(pid for j, fold in enumerate(self.folds) if j != i for pid in fold)
            yield train, held_out


def _unique_ordered(items: Sequence[str]) -> list[str]:
    out: list[str] = []
    for it in items:
        if it not in out:
            out.append(it)
    return out


def grouped_kfold(participants: Sequence[str], k: int, seed: int) -> FoldPlan:
    """Shuffle participants under the seed and deal them into k folds.

    Fold sizes differ by at most one (12 participants into 5 folds gives
    sizes 3,3,2,2,2).
    """
    ids = _unique_ordered(participants)
    n = len(ids)
    if not (1 <= k <= n):
        raise BadFoldCountError(f"k must be in [1, {n}], got {k}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    folds = tuple(tuple(ids[p] for p in perm[i::k]) for i in range(k))
    return FoldPlan(folds=folds)


def _proportional_counts(sizes: dict[int, int], budget: int) -> dict[int, int]:
    """Largest-remainder allocation of budget across classes, at least one
    per class when the budget allows (topped up from the largest share)."""
    total = sum(sizes.values())
    quotas = {c: budget * sz / total for c, sz in sizes.items()}
    counts = {c: int(math.floor(q)) for c, q in quotas.items()}
    for c in sorted(sizes, key=lambda c: (-(quotas[c] - counts[c]), c)):
        if sum(counts.values()) >= budget:
            break
        counts[c] += 1
    if budget >= len(sizes):
        for c in sorted(sizes):
            while counts[c] == 0:
                donor = max(
                    (d for d in sizes if counts[d] > 1), key=lambda d: counts[d], default=None
                )
                if donor is None:
                    break
                counts[donor] -= 1
                counts[c] += 1
    return counts


def stratified_subsample(labels: Sequence[int], cap: int, seed: int) -> np.ndarray:
    """Sorted indices of a class-proportional subsample of at most cap rows.

    Identity when the input already fits.  Every present class keeps at
    least one row when cap allows.  Sorting the result keeps downstream
    work independent of class iteration order.
    """
    y = np.asarray(labels, dtype=int)
    n = y.shape[0]
    if cap < 1:
        raise ValueError(f"cap must be >= 1, got {cap}")
    if n <= cap:
        return np.arange(n)
    classes = np.unique(y)
    counts = _proportional_counts({int(c): int(np.sum(y == c)) for c in classes}, cap)
    rng = np.random.default_rng(seed)
    picks = []
    for c in classes:
        idx = np.flatnonzero(y == c)
        order = rng.permutation(idx.shape[0])
        picks.append(idx[order[: counts[int(c)]]])
    return np.sort(np.concatenate(picks))


def split_holdout(
    participants: Sequence[str],
    test_frac: float,
    seed: int,
    skills: Sequence[int] | None = None,
) -> tuple[list[str], list[str]]:
    """Deterministic participant-level holdout split.

    Test size is round(test_frac * n), clamped to [1, n-1].  When skills are
    given the test side takes at least one participant of every class that
    the budget allows, allocating the rest proportionally.
    """
    ids = _unique_ordered(participants)
    n = len(ids)
    if n < 2:
        raise TooFewParticipantsError(f"need at least 2 participants, got {n}")
    if not (0.0 < test_frac < 1.0):
        raise ValueError(f"test_frac must be in (0, 1), got {test_frac}")
    n_test = int(math.floor(test_frac * n + 0.5))
    n_test = min(max(n_test, 1), n - 1)
    rng = np.random.default_rng(seed)

    if skills is None:
        perm = rng.permutation(n)
        test = sorted(ids[p] for p in perm[:n_test])
        train = sorted(set(ids) - set(test))
        return train, test

    if len(skills) != len(participants):
        raise ValueError("skills must parallel participants")
    skill_of = {pid: int(s) for pid, s in zip(participants, skills)}
    classes = sorted({skill_of[pid] for pid in ids})
    by_class = {c: [pid for pid in ids if skill_of[pid] == c] for c in classes}
    for c in classes:
        order = rng.permutation(len(by_class[c]))
        by_class[c] = [by_class[c][i] for i in order]

    counts = _proportional_counts({c: len(by_class[c]) for c in classes}, n_test)
    for c in classes:  # never strip a class out of the training side
        if counts[c] >= len(by_class[c]):
            counts[c] = len(by_class[c]) - 1
    if sum(counts.values()) == 0:
        # all-singleton classes: test must still hold someone
        biggest = max(classes, key=lambda c: (len(by_class[c]), -c))
        counts[biggest] = 1

    test = sorted(pid for c in classes for pid in by_class[c][: counts[c]])
    train = sorted(set(ids) - set(test))
    return train, test
