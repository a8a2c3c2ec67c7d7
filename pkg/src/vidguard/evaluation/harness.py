"""Cross-validation harness shared by the fusion model, the baselines, and
the ablation study.

Per fold: the feature extractor is fit on the training records only (no
leakage of scaling statistics or vocabularies), SMOTE rebalances the
training matrix, the model trains, and metrics come from the untouched
test fold. Synthetic points get their token sequences copied verbatim from
the real minority row they were interpolated from (SMOTE is defined on
numeric vectors only).
"""

from __future__ import annotations

from dataclasses import replace as dc_replace
from typing import Callable, Optional, Sequence

import numpy as np

from ..features.bundle import FeatureBundle, FeatureExtractor, numeric_matrix
from ..model.config import ALL_BRANCHES, ModelConfig, TrainHyperparams
from ..model.estimator import FusionClassifier
from .folds import FoldPlan
from .metrics import FoldMetrics, MetricsReport, compute_metrics
from .smote import smote

ExtractorFactory = Callable[[], FeatureExtractor]


def smote_bundles(
    bundles: Sequence[FeatureBundle],
    labels: Sequence,
    k_neighbors: int = 5,
    seed: int = 0,
) -> tuple[list[FeatureBundle], list]:
    """SMOTE over the flattened numeric block of the bundles."""
    X = numeric_matrix(bundles)
    y = np.asarray([getattr(l, "value", l) for l in labels])
    result = smote(X, y, k_neighbors=k_neighbors, seed=seed)
    label_by_value = {getattr(l, "value", l): l for l in labels}
    thumb_dim = bundles[0].thumbnail.shape[0]
    out_bundles = []
    out_labels = []
    for row, value, base in zip(result.X, result.y, result.base_indices):
        template = bundles[base]
        out_bundles.append(
            FeatureBundle(
                video_id=template.video_id,
                title_ids=template.title_ids,
                tag_ids=template.tag_ids,
                thumbnail=row[:thumb_dim],
                stats_style=row[thumb_dim:],
                thumbnail_missing=template.thumbnail_missing,
            )
        )
        out_labels.append(label_by_value[value])
    return out_bundles, out_labels


def config_for(
    extractor: FeatureExtractor,
    n_classes: int,
    branches: tuple[str, ...] = ALL_BRANCHES,
    **overrides,
) -> ModelConfig:
    """Architecture config with vocabulary and stats sizes taken from a
    fitted extractor."""
    params = dict(
        title_vocab_size=extractor.title_vocab_.size,
        tags_vocab_size=extractor.tags_vocab_.size,
        stats_dim=extractor.stats_style_dim,
        title_len=extractor.title_len,
        tags_len=extractor.tags_len,
        n_classes=n_classes,
        branches=branches,
    )
    params.update(overrides)
    return ModelConfig(**params)


def run_fusion_cv(
    records: Sequence,
    labels: Sequence,
    fold_plan: FoldPlan,
    extractor_factory: ExtractorFactory,
    branches: tuple[str, ...] = ALL_BRANCHES,
    hyperparams: Optional[TrainHyperparams] = None,
    smote_k: int = 5,
    name: str = "fusion",
    config_overrides: Optional[dict] = None,
) -> MetricsReport:
    """Train/evaluate the fusion network across the folds with SMOTE."""
    hyperparams = hyperparams or TrainHyperparams()
    n_classes = len(set(labels))
    fold_results: list[FoldMetrics] = []
    for fold_i, (train_idx, test_idx) in enumerate(fold_plan.split()):
        extractor = extractor_factory()
        train_records = [records[i] for i in train_idx]
        train_labels = [labels[i] for i in train_idx]
        test_records = [records[i] for i in test_idx]
        test_labels = [labels[i] for i in test_idx]
        extractor.fit(train_records)
        train_bundles = extractor.transform(train_records)
        test_bundles = extractor.transform(test_records)
        train_bundles, train_labels = smote_bundles(
            train_bundles, train_labels, k_neighbors=smote_k, seed=fold_plan.rng_seed + fold_i
        )
        config = config_for(
            extractor, n_classes, branches, **(config_overrides or {})
        )
        clf = FusionClassifier(config, hyperparams)
        clf.fit(train_bundles, train_labels)
        proba = clf.predict_proba(test_bundles)
        preds = [clf.classes_[i] for i in proba.argmax(axis=1)]
        scores = proba[:, 1] if n_classes == 2 else proba
        fold_results.append(
            compute_metrics(test_labels, preds, scores, classes=clf.classes_)
        )
    return MetricsReport(name=name, folds=fold_results)


def ablate(
    records: Sequence,
    labels: Sequence,
    fold_plan: FoldPlan,
    extractor_factory: ExtractorFactory,
    hyperparams: Optional[TrainHyperparams] = None,
    smote_k: int = 5,
) -> list[tuple[tuple[str, ...], MetricsReport]]:
    """One row per non-empty subset of the four input branches (15 rows)."""
    rows = []
    for mask in range(1, 2 ** len(ALL_BRANCHES)):
        subset = tuple(
            b for i, b in enumerate(ALL_BRANCHES) if mask & (1 << i)
        )
        report = run_fusion_cv(
            records,
            labels,
            fold_plan,
            extractor_factory,
            branches=subset,
            hyperparams=hyperparams,
            smote_k=smote_k,
            name="+".join(subset),
        )
        rows.append((subset, report))
    return rows


def ablation_table(rows: list[tuple[tuple[str, ...], MetricsReport]]) -> str:
    header = "thumbnail\ttitle\ttags\tstats\taccuracy\tprecision\trecall\tf1\tauc"
    lines = [header]
    for subset, report in rows:
        marks = ["X" if b in subset else "" for b in ("thumbnail", "title", "tags", "stats")]
        cells = marks + [
            "%.3f (+/- %.2f)" % report._stat(a)
            for a in ("accuracy", "precision", "recall", "f1", "auc")
        ]
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"
