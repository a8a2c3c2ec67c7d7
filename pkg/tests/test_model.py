import numpy as np
import pytest
import torch

from conftest import make_record, synthetic_labeled_records
from vidguard.core import BinaryLabel, Label
from vidguard.features.bundle import FeatureExtractor
from vidguard.features.thumbnail import HashEmbeddingProvider
from vidguard.model.config import ALL_BRANCHES, ModelConfig, TrainHyperparams
from vidguard.model.estimator import (
    FusionClassifier,
    ModelFormatError,
    TrainedPipeline,
    bundles_to_tensors,
)
from vidguard.model.gradcheck import max_relative_gradient_error
from vidguard.model.network import FusionNet, TextBranch

TINY = dict(
    title_vocab_size=20,
    tags_vocab_size=20,
    stats_dim=6,
    embed_dim=4,
    title_len=5,
    tags_len=5,
    lstm_units=4,
    stats_hidden=3,
    thumbnail_dim=8,
    fusion_units=8,
)


def tiny_config(**overrides):
    params = dict(TINY)
    params.update(overrides)
    return ModelConfig(**params)


def tiny_inputs(n=6, seed=0, config=None):
    config = config or tiny_config()
    rng = np.random.default_rng(seed)
    title = torch.tensor(
        rng.integers(0, config.title_vocab_size, (n, config.title_len)), dtype=torch.long
    )
    tags = torch.tensor(
        rng.integers(0, config.tags_vocab_size, (n, config.tags_len)), dtype=torch.long
    )
    thumb = torch.tensor(rng.standard_normal((n, config.thumbnail_dim)), dtype=torch.float32)
    stats = torch.tensor(rng.standard_normal((n, config.stats_dim)), dtype=torch.float32)
    return title, tags, thumb, stats


class TestModelConfig:
    def test_default_fusion_width(self):
        config = ModelConfig(title_vocab_size=100, tags_vocab_size=100, stats_dim=30)
        assert config.fusion_input == 2137
        assert config.branch_widths == {
            "title": 32,
            "tags": 32,
            "thumbnail": 2048,
            "stats": 25,
        }

    def test_subset_widths(self):
        config = ModelConfig(
            title_vocab_size=100, tags_vocab_size=100, stats_dim=30,
            branches=("title", "stats"),
        )
        assert config.fusion_input == 32 + 25

    def test_invalid_values_rejected(self):
        with pytest.raises(ValueError):
            tiny_config(n_classes=3)
        with pytest.raises(ValueError):
            tiny_config(branches=("nope",))
        with pytest.raises(ValueError):
            tiny_config(branches=())
        with pytest.raises(ValueError):
            tiny_config(dropout=1.0)

    def test_roundtrip(self):
        config = tiny_config(branches=("title", "thumbnail"))
        assert ModelConfig.from_dict(config.to_dict()) == config

    def test_hyperparams_roundtrip_and_validation(self):
        h = TrainHyperparams(learning_rate=1e-3, epochs=3)
        assert TrainHyperparams.from_dict(h.to_dict()) == h
        with pytest.raises(ValueError):
            TrainHyperparams(learning_rate=0)


class TestNetwork:
    def test_forward_shape_and_simplex(self):
        for n_classes in (2, 4):
            config = tiny_config(n_classes=n_classes)
            net = FusionNet(config)
            proba = net.predict_proba(*tiny_inputs(config=config))
            assert proba.shape == (6, n_classes)
            assert torch.all(proba >= 0)
            assert torch.allclose(proba.sum(dim=1), torch.ones(6), atol=1e-6)

    def test_branch_subsets_build_and_run(self):
        for branches in (("title",), ("thumbnail", "stats"), ALL_BRANCHES):
            config = tiny_config(branches=branches)
            out = FusionNet(config)(*tiny_inputs(config=config))
            assert out.shape == (6, 4)

    def test_text_branch_ignores_trailing_padding(self):
        torch.manual_seed(0)
        branch = TextBranch(vocab_size=10, embed_dim=4, units=3)
        short = torch.tensor([[5, 7, 0, 0]])
        longer = torch.tensor([[5, 7, 0, 0, 0, 0, 0, 0]])
        assert torch.allclose(branch(short), branch(longer), atol=1e-6)

    def test_text_branch_all_pad_is_zero(self):
        branch = TextBranch(vocab_size=10, embed_dim=4, units=3)
        out = branch(torch.zeros((2, 5), dtype=torch.long))
        assert torch.all(out == 0)

    def test_dropout_active_only_in_train_mode(self):
        config = tiny_config(dropout=0.5)
        net = FusionNet(config)
        inputs = tiny_inputs(config=config)
        net.train()
        torch.manual_seed(0)
        a = net(*inputs)
        torch.manual_seed(1)
        b = net(*inputs)
        assert not torch.allclose(a, b)  # dropout mask varies
        net.eval()
        with torch.no_grad():
            assert torch.allclose(net(*inputs), net(*inputs))


class TestGradientCheck:
    def test_max_relative_error_small(self):
        config = tiny_config(dropout=0.0)
        torch.manual_seed(0)
        net = FusionNet(config)
        inputs = tiny_inputs(config=config)
        targets = torch.tensor([0, 1, 2, 3, 0, 1])
        err = max_relative_gradient_error(net, inputs, targets, n_probes=20)
        assert err <= 1e-4


def _fitted_bundles(n=40, n_classes=2):
    records, labels = synthetic_labeled_records(n=n)
    if n_classes == 4:
        cycle = list(Label)
        labels = [cycle[i % 4] for i in range(n)]
    fe = FeatureExtractor(embedding_provider=HashEmbeddingProvider())
    bundles = fe.fit_transform(records)
    return fe, bundles, labels


def small_clf(fe, n_classes=2, **hyper):
    config = ModelConfig(
        title_vocab_size=fe.title_vocab_.size,
        tags_vocab_size=fe.tags_vocab_.size,
        stats_dim=fe.stats_style_dim,
        n_classes=n_classes,
        fusion_units=16,
        embed_dim=8,
        lstm_units=8,
        stats_hidden=4,
        dropout=0.0,
    )
    defaults = dict(learning_rate=1e-3, epochs=3, rng_seed=0)
    defaults.update(hyper)
    return FusionClassifier(config, TrainHyperparams(**defaults))


class TestFusionClassifier:
    def test_fit_predict_binary(self):
        fe, bundles, labels = _fitted_bundles()
        clf = small_clf(fe).fit(bundles, labels)
        assert clf.classes_ == [BinaryLabel.APPROPRIATE, BinaryLabel.INAPPROPRIATE]
        proba = clf.predict_proba(bundles)
        assert proba.shape == (40, 2)
        assert np.allclose(proba.sum(axis=1), 1.0, atol=1e-6)
        preds = clf.predict(bundles)
        assert set(preds) <= set(clf.classes_)

    def test_predictions_are_argmax(self):
        fe, bundles, labels = _fitted_bundles()
        clf = small_clf(fe).fit(bundles, labels)
        proba = clf.predict_proba(bundles)
        preds = clf.predict(bundles)
        for p, pred in zip(proba, preds):
            assert pred == clf.classes_[p.argmax()]

    def test_class_count_mismatch_rejected(self):
        fe, bundles, labels = _fitted_bundles()
        with pytest.raises(ValueError):
            small_clf(fe, n_classes=4).fit(bundles, labels)

    def test_deterministic_given_seed(self):
        fe, bundles, labels = _fitted_bundles()
        a = small_clf(fe).fit(bundles, labels)
        b = small_clf(fe).fit(bundles, labels)
        assert a.loss_history_ == b.loss_history_
        assert np.array_equal(a.predict_proba(bundles), b.predict_proba(bundles))

    def test_memorizes_small_training_set(self):
        fe, bundles, labels = _fitted_bundles(n=10)
        clf = small_clf(fe, epochs=150).fit(bundles, labels)
        assert clf.predict(bundles) == labels

    def test_early_stopping_restores_best_state(self):
        fe, bundles, labels = _fitted_bundles()
        clf = small_clf(fe, epochs=40)
        clf.hyperparams = TrainHyperparams(
            learning_rate=1e-3, epochs=40, rng_seed=0, early_stopping_patience=2
        )
        clf.fit(bundles[:30], labels[:30], validation=(bundles[30:], labels[30:]))
        assert len(clf.loss_history_) <= 40

    def test_stats_dim_mismatch_rejected_at_predict(self):
        fe, bundles, labels = _fitted_bundles()
        clf = small_clf(fe).fit(bundles, labels)
        import dataclasses

        bad = [dataclasses.replace(b, stats_style=b.stats_style[:-1]) for b in bundles[:2]]
        with pytest.raises(ValueError):
            clf.predict_proba(bad)

    def test_predict_before_fit_raises(self):
        fe, bundles, _ = _fitted_bundles()
        with pytest.raises(RuntimeError):
            small_clf(fe).predict_proba(bundles)

    def test_four_class(self):
        fe, bundles, labels = _fitted_bundles(n_classes=4)
        clf = small_clf(fe, n_classes=4).fit(bundles, labels)
        proba = clf.predict_proba(bundles)
        assert proba.shape == (40, 4)
        assert np.allclose(proba.sum(axis=1), 1.0, atol=1e-6)


class TestPersistence:
    def _trained(self):
        records, labels = synthetic_labeled_records(n=30)
        fe = FeatureExtractor(embedding_provider=HashEmbeddingProvider())
        bundles = fe.fit_transform(records)
        clf = small_clf(fe).fit(bundles, labels)
        return TrainedPipeline(fe, clf), records

    def test_save_load_identical_predictions(self, tmp_path):
        pipeline, records = self._trained()
        path = tmp_path / "model.pt"
        pipeline.save(path)
        restored = TrainedPipeline.load(path, embedding_provider=HashEmbeddingProvider())
        before = pipeline.predict_proba_records(records)
        after = restored.predict_proba_records(records)
        assert np.abs(before - after).max() < 1e-6
        assert restored.classes_ == pipeline.classes_
        assert isinstance(restored.classes_[0], BinaryLabel)

    def test_predict_records_matches_proba(self, tmp_path):
        pipeline, records = self._trained()
        proba = pipeline.predict_proba_records(records)
        preds = pipeline.predict_records(records)
        for p, pred in zip(proba, preds):
            assert pred == pipeline.classes_[p.argmax()]

    def test_corrupt_file_rejected(self, tmp_path):
        path = tmp_path / "model.pt"
        path.write_bytes(b"not a model")
        with pytest.raises(ModelFormatError):
            TrainedPipeline.load(path)

    def test_wrong_format_version_rejected(self, tmp_path):
        pipeline, _ = self._trained()
        path = tmp_path / "model.pt"
        pipeline.save(path)
        payload = torch.load(path, weights_only=False)
        payload["format_version"] = 99
        torch.save(payload, path)
        with pytest.raises(ModelFormatError):
            TrainedPipeline.load(path)

    def test_non_container_payload_rejected(self, tmp_path):
        path = tmp_path / "model.pt"
        torch.save({"something": 1}, path)
        with pytest.raises(ModelFormatError):
            TrainedPipeline.load(path)


class TestBundlesToTensors:
    def test_shapes_and_dtypes(self):
        fe, bundles, _ = _fitted_bundles(n=4)
        title, tags, thumb, stats = bundles_to_tensors(bundles)
        assert title.dtype == torch.long and tags.dtype == torch.long
        assert thumb.dtype == torch.float32 and stats.dtype == torch.float32
        assert title.shape == (4, fe.title_len)
        assert stats.shape == (4, fe.stats_style_dim)
