"""Synthetic minority oversampling (Chawla et al. 2002).

Every class is oversampled up to the majority count. Each synthetic point
is x + u * (neighbor - x) with u ~ U[0, 1] and the neighbor drawn among the
k nearest same-class points, so synthetics stay on segments between real
minority points.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.neighbors import NearestNeighbors


@dataclass
class SmoteResult:
    X: np.ndarray
    y: np.ndarray
    #: for each output row, the index of the real input row it is based on
    #: (the row itself for originals, the interpolation base for synthetics)
    base_indices: np.ndarray
    n_synthetic: int


def smote(X, y, k_neighbors: int = 5, seed: int = 0) -> SmoteResult:
    """Balance all classes up to the majority class count.

    A minority class of size 1 cannot be interpolated; it falls back to
    duplication with a warning.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    classes, counts = np.unique(y, return_counts=True)
    majority = counts.max()
    rng = np.random.default_rng(seed)

    out_X = [X]
    out_y = [y]
    out_base = [np.arange(len(X))]
    n_synthetic = 0
    for cls, count in zip(classes, counts):
        need = majority - count
        if need == 0:
            continue
        idx = np.flatnonzero(y == cls)
        points = X[idx]
        if count == 1:
            warnings.warn(
                f"class {cls!r} has a single sample; duplicating instead of "
                "interpolating",
                stacklevel=2,
            )
            base = np.repeat(idx, need)
            out_X.append(np.repeat(points, need, axis=0))
            out_y.append(np.repeat([cls], need))
            out_base.append(base)
            n_synthetic += need
            continue
        k = min(k_neighbors, count - 1)
        nn = NearestNeighbors(n_neighbors=k + 1).fit(points)
        neighbor_idx = nn.kneighbors(points, return_distance=False)[:, 1:]
        base_local = rng.integers(count, size=need)
        chosen = neighbor_idx[base_local, rng.integers(k, size=need)]
        u = rng.uniform(size=(need, 1))
        synthetic = points[base_local] + u * (points[chosen] - points[base_local])
        out_X.append(synthetic)
        out_y.append(np.repeat([cls], need))
        out_base.append(idx[base_local])
        n_synthetic += need

    return SmoteResult(
        X=np.concatenate(out_X),
        y=np.concatenate(out_y),
        base_indices=np.concatenate(out_base),
        n_synthetic=n_synthetic,
    )
