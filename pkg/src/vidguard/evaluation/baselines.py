"""The seven comparison baselines.

Classical models ride on scikit-learn with the published hyperparameter
values; the two neural baselines (double-dense network, and convolution
over the text embeddings feeding the same trunk) are small torch models.
All baselines consume every input feature: the flattened numeric block
plus bag-of-index presence vectors for title and tags.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import torch
from torch import nn

from ..features.bundle import FeatureBundle, numeric_matrix, presence_matrix
from ..model.config import TrainHyperparams
from .folds import FoldPlan
from .harness import ExtractorFactory
from .metrics import FoldMetrics, MetricsReport, compute_metrics
from .smote import smote

BASELINE_NAMES = (
    "naive_bayes",
    "knn",
    "decision_tree",
    "svm",
    "random_forest",
    "ddnn",
    "cnn_ddnn",
)

_DEFAULT_PARAMS = {
    "naive_bayes": {"alpha": 1.0},
    "knn": {"n_neighbors": 8, "leaf_size": 10},
    "decision_tree": {"criterion": "entropy"},
    "svm": {"C": 10.0, "gamma": "auto"},
    "random_forest": {"criterion": "entropy", "n_estimators": 100},
    "ddnn": {"hidden": 512, "dropout": 0.5},
    "cnn_ddnn": {"hidden": 512, "dropout": 0.5, "embed_dim": 32, "filters": 32, "kernel": 3},
}


@dataclass
class BaselineSpec:
    """Named baseline with parameters defaulting to the published values."""

    name: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in BASELINE_NAMES:
            raise ValueError(f"unknown baseline: {self.name}")
        merged = dict(_DEFAULT_PARAMS[self.name])
        merged.update(self.params)
        self.params = merged


def _sklearn_model(spec: BaselineSpec, seed: int):
    from sklearn.ensemble import RandomForestClassifier
    from sklearn.naive_bayes import BernoulliNB
    from sklearn.neighbors import KNeighborsClassifier
    from sklearn.svm import SVC
    from sklearn.tree import DecisionTreeClassifier

    p = spec.params
    if spec.name == "naive_bayes":
        return BernoulliNB(alpha=p["alpha"])
    if spec.name == "knn":
        return KNeighborsClassifier(n_neighbors=p["n_neighbors"], leaf_size=p["leaf_size"])
    if spec.name == "decision_tree":
        return DecisionTreeClassifier(criterion=p["criterion"], random_state=seed)
    if spec.name == "svm":
        return SVC(C=p["C"], gamma=p["gamma"], probability=True, random_state=seed)
    if spec.name == "random_forest":
        return RandomForestClassifier(
            criterion=p["criterion"], n_estimators=p["n_estimators"], random_state=seed
        )
    raise ValueError(spec.name)


class _DDNN(nn.Module):
    def __init__(self, in_dim: int, hidden: int, dropout: float, n_classes: int):
        super().__init__()
        self.layers = nn.Sequential(
            nn.Linear(in_dim, hidden),
            nn.ReLU(),
            nn.Dropout(dropout),
            nn.Linear(hidden, n_classes),
        )

    def forward(self, x):
        return self.layers(x)


class _CnnDDNN(nn.Module):
    """1-D convolution over the concatenated text embeddings, max-pooled and
    joined with the numeric block, feeding the double-dense trunk."""

    def __init__(
        self,
        title_vocab: int,
        tags_vocab: int,
        numeric_dim: int,
        n_classes: int,
        embed_dim: int,
        filters: int,
        kernel: int,
        hidden: int,
        dropout: float,
    ):
        super().__init__()
        self.title_embedding = nn.Embedding(title_vocab, embed_dim, padding_idx=0)
        self.tags_embedding = nn.Embedding(tags_vocab, embed_dim, padding_idx=0)
        self.conv = nn.Conv1d(embed_dim, filters, kernel, padding=kernel // 2)
        self.trunk = _DDNN(filters + numeric_dim, hidden, dropout, n_classes)

    def forward(self, title_ids, tag_ids, numeric):
        emb = torch.cat(
            [self.title_embedding(title_ids), self.tags_embedding(tag_ids)], dim=1
        )
        conv = torch.relu(self.conv(emb.transpose(1, 2)))
        pooled = conv.max(dim=2).values
        return self.trunk(torch.cat([pooled, numeric], dim=1))


def _train_torch(net, inputs: tuple, y: torch.Tensor, hyper: TrainHyperparams):
    torch.manual_seed(hyper.rng_seed)
    optimizer = torch.optim.Adam(net.parameters(), lr=hyper.learning_rate, eps=hyper.epsilon)
    criterion = nn.CrossEntropyLoss()
    generator = torch.Generator().manual_seed(hyper.rng_seed)
    n = len(y)
    for _ in range(hyper.epochs):
        order = torch.randperm(n, generator=generator)
        net.train()
        for start in range(0, n, hyper.batch_size):
            idx = order[start : start + hyper.batch_size]
            optimizer.zero_grad()
            loss = criterion(net(*(t[idx] for t in inputs)), y[idx])
            loss.backward()
            optimizer.step()
    net.eval()
    return net


def _flat_features(bundles: Sequence[FeatureBundle], title_vocab: int, tags_vocab: int):
    return np.concatenate(
        [
            numeric_matrix(bundles),
            presence_matrix(bundles, "title", title_vocab),
            presence_matrix(bundles, "tags", tags_vocab),
        ],
        axis=1,
    )


def run_baseline(
    spec: BaselineSpec,
    records: Sequence,
    labels: Sequence,
    fold_plan: FoldPlan,
    extractor_factory: ExtractorFactory,
    hyperparams: Optional[TrainHyperparams] = None,
    smote_k: int = 5,
) -> MetricsReport:
    """Per-fold train (with SMOTE) / test for one baseline."""
    hyperparams = hyperparams or TrainHyperparams()
    classes = sorted(set(labels), key=str)
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
        seed = fold_plan.rng_seed + fold_i

        if spec.name in ("ddnn", "cnn_ddnn"):
            fold_results.append(
                _neural_fold(
                    spec, extractor, train_bundles, train_labels, test_bundles,
                    test_labels, classes, hyperparams, smote_k, seed,
                )
            )
            continue

        tv, gv = extractor.title_vocab_.size, extractor.tags_vocab_.size
        X_train = _flat_features(train_bundles, tv, gv)
        X_test = _flat_features(test_bundles, tv, gv)
        y_train = np.asarray([getattr(l, "value", l) for l in train_labels])
        balanced = smote(X_train, y_train, k_neighbors=smote_k, seed=seed)
        model = _sklearn_model(spec, seed)
        model.fit(balanced.X, balanced.y)
        by_value = {getattr(c, "value", c): c for c in classes}
        preds = [by_value[v] for v in model.predict(X_test)]
        proba = model.predict_proba(X_test)
        # align probability columns with our sorted class order
        col = {v: j for j, v in enumerate(model.classes_)}
        proba = proba[:, [col[getattr(c, "value", c)] for c in classes]]
        scores = proba[:, 1] if len(classes) == 2 else proba
        fold_results.append(compute_metrics(test_labels, preds, scores, classes=classes))
    return MetricsReport(name=spec.name, folds=fold_results)


def _neural_fold(
    spec, extractor, train_bundles, train_labels, test_bundles, test_labels,
    classes, hyperparams, smote_k, seed,
) -> FoldMetrics:
    from .harness import smote_bundles

    train_bundles, train_labels = smote_bundles(
        train_bundles, train_labels, k_neighbors=smote_k, seed=seed
    )
    class_index = {c: i for i, c in enumerate(classes)}
    y = torch.tensor([class_index[l] for l in train_labels], dtype=torch.long)
    tv, gv = extractor.title_vocab_.size, extractor.tags_vocab_.size
    p = spec.params

    if spec.name == "ddnn":
        X = torch.tensor(_flat_features(train_bundles, tv, gv), dtype=torch.float32)
        net = _DDNN(X.shape[1], p["hidden"], p["dropout"], len(classes))
        _train_torch(net, (X,), y, hyperparams)
        X_test = torch.tensor(_flat_features(test_bundles, tv, gv), dtype=torch.float32)
        with torch.no_grad():
            proba = torch.softmax(net(X_test), dim=1).numpy()
    else:
        def tensors(bundles):
            return (
                torch.tensor(np.stack([b.title_ids for b in bundles]), dtype=torch.long),
                torch.tensor(np.stack([b.tag_ids for b in bundles]), dtype=torch.long),
                torch.tensor(numeric_matrix(bundles), dtype=torch.float32),
            )

        inputs = tensors(train_bundles)
        net = _CnnDDNN(
            tv, gv, inputs[2].shape[1], len(classes),
            p["embed_dim"], p["filters"], p["kernel"], p["hidden"], p["dropout"],
        )
        _train_torch(net, inputs, y, hyperparams)
        with torch.no_grad():
            proba = torch.softmax(net(*tensors(test_bundles)), dim=1).numpy()

    preds = [classes[i] for i in proba.argmax(axis=1)]
    scores = proba[:, 1] if len(classes) == 2 else proba
    return compute_metrics(test_labels, preds, scores, classes=classes)
