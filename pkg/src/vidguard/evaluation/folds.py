"""Stratified k-fold planning."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.model_selection import StratifiedKFold


@dataclass(frozen=True)
class FoldPlan:
    """Disjoint test folds covering all indices, class-proportional ±1."""

    k: int
    folds: tuple[tuple[int, ...], ...]
    rng_seed: int

    def split(self):
        """Yield (train_indices, test_indices) per fold."""
        all_idx = sorted(i for fold in self.folds for i in fold)
        for fold in self.folds:
            test = set(fold)
            yield [i for i in all_idx if i not in test], list(fold)


def stratified_kfold(labels, k: int = 5, seed: int = 0) -> FoldPlan:
    """Plan ``k`` stratified folds; deterministic given ``seed``.

    Raises ValueError when any class has fewer than ``k`` members.
    """
    labels = np.asarray([getattr(l, "value", l) for l in labels])
    _, counts = np.unique(labels, return_counts=True)
    if counts.min() < k:
        raise ValueError(
            f"smallest class has {counts.min()} members, cannot make {k} folds"
        )
    splitter = StratifiedKFold(n_splits=k, shuffle=True, random_state=seed)
    folds = tuple(
        tuple(int(i) for i in test)
        for _, test in splitter.split(np.zeros(len(labels)), labels)
    )
    return FoldPlan(k=k, folds=folds, rng_seed=seed)
