"""Fleiss' kappa: chance-corrected agreement for a fixed rater count.

Reference: Fleiss (1971), "Measuring Nominal Scale Agreement Among Many
Raters".
"""

from __future__ import annotations

from collections import Counter
from typing import Mapping, Sequence

import numpy as np

from ..core import Label


class DegenerateAgreementError(ValueError):
    """Chance agreement is 1 while observed agreement is not."""


def fleiss_kappa(matrix) -> float:
    """Kappa for an N x K matrix of category counts, constant raters per row.

    kappa = (P_bar - P_e) / (1 - P_e), where P_bar is the mean per-item
    agreement and P_e the chance agreement from the marginal category
    proportions. Returns exactly 1.0 on perfect agreement.
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2 or m.size == 0:
        raise ValueError("matrix must be N x K with N >= 1")
    row_sums = m.sum(axis=1)
    n = row_sums[0]
    if n < 2:
        raise ValueError("need at least 2 raters per item")
    if not np.all(row_sums == n):
        raise ValueError("raters per item must be constant across rows")
    big_n = m.shape[0]
    p_j = m.sum(axis=0) / (big_n * n)
    p_i = (np.sum(m * m, axis=1) - n) / (n * (n - 1))
    p_bar = p_i.mean()
    p_e = np.sum(p_j * p_j)
    if p_bar == 1.0:
        return 1.0
    if p_e == 1.0:
        raise DegenerateAgreementError("degenerate chance agreement")
    return float((p_bar - p_e) / (1.0 - p_e))


def rating_matrix(
    votes_by_video: Mapping[str, Sequence[Label]],
    raters_per_item: int = 3,
) -> tuple[np.ndarray, list[str], int]:
    """Build the N x 4 count matrix from per-video vote lists.

    Only videos with exactly ``raters_per_item`` votes enter the matrix
    (the statistic requires a constant rater count); the number of skipped
    videos is returned alongside.
    """
    categories = list(Label)
    rows = []
    video_ids = []
    skipped = 0
    for vid, votes in votes_by_video.items():
        if len(votes) != raters_per_item:
            skipped += 1
            continue
        counts = Counter(votes)
        rows.append([counts.get(c, 0) for c in categories])
        video_ids.append(vid)
    if not rows:
        return np.zeros((0, len(categories))), [], skipped
    return np.asarray(rows, dtype=np.int64), video_ids, skipped
