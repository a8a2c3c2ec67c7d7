"""Scikit-learn-style estimator around the fusion network, plus the
self-contained trained-pipeline container (network + vocabularies +
feature scaling) used for persistence and batch classification.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
import torch
from torch import nn

from ..features.bundle import FeatureBundle, FeatureExtractor
from .config import ModelConfig, TrainHyperparams
from .network import FusionNet

FORMAT_VERSION = 1


class ModelFormatError(RuntimeError):
    """Unreadable or incompatible model file."""


def bundles_to_tensors(bundles: Sequence[FeatureBundle]) -> tuple[torch.Tensor, ...]:
    return (
        torch.tensor(np.stack([b.title_ids for b in bundles]), dtype=torch.long),
        torch.tensor(np.stack([b.tag_ids for b in bundles]), dtype=torch.long),
        torch.tensor(np.stack([b.thumbnail for b in bundles]), dtype=torch.float32),
        torch.tensor(np.stack([b.stats_style for b in bundles]), dtype=torch.float32),
    )


class FusionClassifier:
    """fit/predict estimator for the four-branch network.

    Training is deterministic given ``hyperparams.rng_seed`` (and a fixed
    thread count); the only order sensitivity is the seeded shuffle.
    """

    def __init__(
        self,
        config: ModelConfig,
        hyperparams: Optional[TrainHyperparams] = None,
    ):
        self.config = config
        self.hyperparams = hyperparams or TrainHyperparams()

    def get_params(self, deep: bool = True) -> dict:
        return {"config": self.config, "hyperparams": self.hyperparams}

    def set_params(self, **params) -> "FusionClassifier":
        for key, value in params.items():
            if key not in ("config", "hyperparams"):
                raise ValueError(f"unknown parameter: {key}")
            setattr(self, key, value)
        return self

    # -- training -------------------------------------------------------

    def fit(
        self,
        bundles: Sequence[FeatureBundle],
        labels: Sequence,
        validation: Optional[tuple[Sequence[FeatureBundle], Sequence]] = None,
    ) -> "FusionClassifier":
        h = self.hyperparams
        if h.deterministic:
            torch.manual_seed(h.rng_seed)
            torch.set_num_threads(1)
        self.classes_ = sorted(set(labels), key=str)
        if len(self.classes_) != self.config.n_classes:
            raise ValueError(
                f"training data has {len(self.classes_)} classes, "
                f"config expects {self.config.n_classes}"
            )
        class_index = {c: i for i, c in enumerate(self.classes_)}
        y = torch.tensor([class_index[l] for l in labels], dtype=torch.long)
        inputs = bundles_to_tensors(bundles)

        self.net_ = FusionNet(self.config)
        optimizer = torch.optim.Adam(
            self.net_.parameters(), lr=h.learning_rate, eps=h.epsilon
        )
        criterion = nn.CrossEntropyLoss()
        generator = torch.Generator().manual_seed(h.rng_seed)

        val_inputs = val_y = None
        if validation is not None:
            val_inputs = bundles_to_tensors(validation[0])
            val_y = torch.tensor(
                [class_index[l] for l in validation[1]], dtype=torch.long
            )
        best_val = float("inf")
        best_state = None
        stale = 0

        self.loss_history_: list[float] = []
        n = len(bundles)
        for _epoch in range(h.epochs):
            order = torch.randperm(n, generator=generator)
            self.net_.train()
            epoch_loss = 0.0
            for start in range(0, n, h.batch_size):
                idx = order[start : start + h.batch_size]
                batch = tuple(t[idx] for t in inputs)
                optimizer.zero_grad()
                loss = criterion(self.net_(*batch), y[idx])
                loss.backward()
                optimizer.step()
                epoch_loss += loss.item() * len(idx)
            self.loss_history_.append(epoch_loss / n)

            if val_inputs is not None:
                self.net_.eval()
                with torch.no_grad():
                    val_loss = criterion(self.net_(*val_inputs), val_y).item()
                if val_loss < best_val - 1e-6:
                    best_val = val_loss
                    best_state = {
                        k: v.detach().clone() for k, v in self.net_.state_dict().items()
                    }
                    stale = 0
                else:
                    stale += 1
                    if stale >= h.early_stopping_patience:
                        break
        if best_state is not None:
            self.net_.load_state_dict(best_state)
        self.net_.eval()
        return self

    # -- inference ------------------------------------------------------

    def predict_proba(self, bundles: Sequence[FeatureBundle]) -> np.ndarray:
        self._check_fitted()
        inputs = bundles_to_tensors(bundles)
        if inputs[3].shape[1] != self.config.stats_dim:
            raise ValueError(
                f"stats vector has dim {inputs[3].shape[1]}, "
                f"model expects {self.config.stats_dim}"
            )
        return self.net_.predict_proba(*inputs).numpy()

    def predict(self, bundles: Sequence[FeatureBundle]) -> list:
        proba = self.predict_proba(bundles)
        return [self.classes_[i] for i in proba.argmax(axis=1)]

    def _check_fitted(self) -> None:
        if not hasattr(self, "net_"):
            raise RuntimeError("classifier not fitted")

    # -- persistence ----------------------------------------------------

    def _to_state(self) -> dict:
        self._check_fitted()
        return {
            "config": self.config.to_dict(),
            "hyperparams": self.hyperparams.to_dict(),
            "classes": [getattr(c, "value", c) for c in self.classes_],
            "class_kind": type(self.classes_[0]).__name__,
            "state_dict": self.net_.state_dict(),
            "loss_history": self.loss_history_,
        }

    @classmethod
    def _from_state(cls, state: dict) -> "FusionClassifier":
        from ..core import BinaryLabel, Label

        clf = cls(
            ModelConfig.from_dict(state["config"]),
            TrainHyperparams.from_dict(state["hyperparams"]),
        )
        kind = state.get("class_kind", "str")
        cast = {"Label": Label, "BinaryLabel": BinaryLabel}.get(kind, lambda x: x)
        clf.classes_ = [cast(c) for c in state["classes"]]
        clf.net_ = FusionNet(clf.config)
        clf.net_.load_state_dict(state["state_dict"])
        clf.net_.eval()
        clf.loss_history_ = state.get("loss_history", [])
        return clf


class TrainedPipeline:
    """Feature extractor state + trained classifier in one container.

    Prediction on raw VideoRecords needs nothing beyond this object (plus
    an embedding provider for thumbnails).
    """

    def __init__(self, extractor: FeatureExtractor, classifier: FusionClassifier):
        self.extractor = extractor
        self.classifier = classifier

    @property
    def classes_(self):
        return self.classifier.classes_

    def predict_proba_records(self, records) -> np.ndarray:
        return self.classifier.predict_proba(self.extractor.transform(records))

    def predict_records(self, records) -> list:
        return self.classifier.predict(self.extractor.transform(records))

    def save(self, path: Union[str, Path]) -> None:
        payload = {
            "format_version": FORMAT_VERSION,
            "extractor": self.extractor.to_state(),
            "classifier": self.classifier._to_state(),
        }
        path = Path(path)
        tmp = path.with_suffix(path.suffix + ".tmp")
        torch.save(payload, tmp)
        tmp.replace(path)

    @classmethod
    def load(
        cls,
        path: Union[str, Path],
        embedding_provider=None,
        embedding_cache=None,
    ) -> "TrainedPipeline":
        try:
            payload = torch.load(path, weights_only=False)
        except Exception as exc:
            raise ModelFormatError(f"unreadable model file: {exc}") from exc
        if not isinstance(payload, dict) or "format_version" not in payload:
            raise ModelFormatError("not a model container file")
        if payload["format_version"] != FORMAT_VERSION:
            raise ModelFormatError(
                f"model format version {payload['format_version']} unsupported "
                f"(expected {FORMAT_VERSION})"
            )
        extractor = FeatureExtractor.from_state(
            payload["extractor"],
            embedding_provider=embedding_provider,
            embedding_cache=embedding_cache,
        )
        classifier = FusionClassifier._from_state(payload["classifier"])
        return cls(extractor, classifier)
