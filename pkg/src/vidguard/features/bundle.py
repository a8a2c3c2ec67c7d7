"""FeatureBundle and the fit/transform extractor that produces it.

The extractor follows the scikit-learn transformer protocol: ``fit`` learns
vocabularies, the category set, and statistics scaling from the training
records only; ``transform`` maps records to bundles using that state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from ..core import VideoRecord
from .style import StyleFeaturizer, default_bad_words, default_child_words
from .text import Vocabulary, encode_tags, encode_text, tokenize_and_stem
from .thumbnail import (
    EMBEDDING_DIM,
    EmbeddingCache,
    EmbeddingProvider,
    HashEmbeddingProvider,
    embed_thumbnail,
)

TITLE_LEN = 21
TAGS_LEN = 78

# indices of the raw count statistics inside the stats+style vector
_STATS_SLICE = slice(0, 4)


@dataclass
class FeatureBundle:
    """The classifier's four inputs for one video."""

    video_id: str
    title_ids: np.ndarray  # int indices, length title_len
    tag_ids: np.ndarray  # int indices, length tags_len
    thumbnail: np.ndarray  # float, length 2048
    stats_style: np.ndarray  # float, statistics block + style block
    thumbnail_missing: bool = False


class FeatureExtractor:
    """Learns vocabularies and scaling on fit; pure mapping on transform."""

    def __init__(
        self,
        title_len: int = TITLE_LEN,
        tags_len: int = TAGS_LEN,
        bad_words: Optional[frozenset] = None,
        child_words: Optional[frozenset] = None,
        embedding_provider: Optional[EmbeddingProvider] = None,
        embedding_cache: Optional[EmbeddingCache] = None,
    ):
        self.title_len = title_len
        self.tags_len = tags_len
        self.bad_words = bad_words
        self.child_words = child_words
        self.embedding_provider = embedding_provider
        self.embedding_cache = embedding_cache

    # -- sklearn plumbing ----------------------------------------------

    def get_params(self, deep: bool = True) -> dict:
        return {
            "title_len": self.title_len,
            "tags_len": self.tags_len,
            "bad_words": self.bad_words,
            "child_words": self.child_words,
            "embedding_provider": self.embedding_provider,
            "embedding_cache": self.embedding_cache,
        }

    def set_params(self, **params) -> "FeatureExtractor":
        for key, value in params.items():
            if not hasattr(self, key):
                raise ValueError(f"unknown parameter: {key}")
            setattr(self, key, value)
        return self

    # -- fitting --------------------------------------------------------

    def fit(self, records: Iterable[VideoRecord]) -> "FeatureExtractor":
        records = list(records)
        self.title_vocab_ = Vocabulary.build(
            tokenize_and_stem(r.title) for r in records
        )
        self.tags_vocab_ = Vocabulary.build(
            [s for tag in r.tags for s in tokenize_and_stem(tag)] for r in records
        )
        categories = sorted({r.category for r in records if r.category})
        self.style_ = StyleFeaturizer(
            categories=categories,
            bad_words=self.bad_words if self.bad_words is not None else default_bad_words(),
            child_words=self.child_words
            if self.child_words is not None
            else default_child_words(),
        )
        # counts span many orders of magnitude: log1p then standardize,
        # with moments taken from the training records only
        stats = np.log1p(
            np.array(
                [[r.views, r.likes, r.dislikes, r.comments] for r in records],
                dtype=np.float64,
            )
        )
        if len(records):
            self.stats_mean_ = stats.mean(axis=0)
            std = stats.std(axis=0)
        else:
            self.stats_mean_ = np.zeros(4)
            std = np.ones(4)
        self.stats_std_ = np.where(std > 0, std, 1.0)
        return self

    @property
    def is_fitted(self) -> bool:
        return hasattr(self, "title_vocab_")

    # -- transform ------------------------------------------------------

    def transform(self, records: Iterable[VideoRecord]) -> list[FeatureBundle]:
        if not self.is_fitted:
            raise RuntimeError("FeatureExtractor not fitted")
        provider = self.embedding_provider or HashEmbeddingProvider()
        bundles = []
        for r in records:
            vec = self.style_(r)
            scaled = vec.copy()
            scaled[_STATS_SLICE] = (
                np.log1p(vec[_STATS_SLICE]) - self.stats_mean_
            ) / self.stats_std_
            thumb, missing = embed_thumbnail(
                r.thumbnail_ref, provider, self.embedding_cache
            )
            bundles.append(
                FeatureBundle(
                    video_id=r.video_id,
                    title_ids=np.array(
                        encode_text(r.title, self.title_vocab_, self.title_len),
                        dtype=np.int64,
                    ),
                    tag_ids=np.array(
                        encode_tags(r.tags, self.tags_vocab_, self.tags_len),
                        dtype=np.int64,
                    ),
                    thumbnail=thumb,
                    stats_style=scaled,
                    thumbnail_missing=missing,
                )
            )
        return bundles

    def fit_transform(self, records: Sequence[VideoRecord]) -> list[FeatureBundle]:
        return self.fit(records).transform(records)

    @property
    def stats_style_dim(self) -> int:
        return self.style_.size

    # -- persistence (embedded into the model container) ---------------

    def to_state(self) -> dict:
        return {
            "title_len": self.title_len,
            "tags_len": self.tags_len,
            "title_vocab": self.title_vocab_.to_dict(),
            "tags_vocab": self.tags_vocab_.to_dict(),
            "categories": self.style_.categories,
            "bad_words": sorted(self.style_.bad_words),
            "child_words": sorted(self.style_.child_words),
            "stats_mean": self.stats_mean_.tolist(),
            "stats_std": self.stats_std_.tolist(),
        }

    @classmethod
    def from_state(
        cls,
        state: dict,
        embedding_provider: Optional[EmbeddingProvider] = None,
        embedding_cache: Optional[EmbeddingCache] = None,
    ) -> "FeatureExtractor":
        fe = cls(
            title_len=state["title_len"],
            tags_len=state["tags_len"],
            embedding_provider=embedding_provider,
            embedding_cache=embedding_cache,
        )
        fe.title_vocab_ = Vocabulary.from_dict(state["title_vocab"])
        fe.tags_vocab_ = Vocabulary.from_dict(state["tags_vocab"])
        fe.style_ = StyleFeaturizer(
            categories=state["categories"],
            bad_words=frozenset(state["bad_words"]),
            child_words=frozenset(state["child_words"]),
        )
        fe.stats_mean_ = np.array(state["stats_mean"])
        fe.stats_std_ = np.array(state["stats_std"])
        return fe


def numeric_matrix(bundles: Sequence[FeatureBundle]) -> np.ndarray:
    """Flattened numeric block (thumbnail + stats/style) used by SMOTE and
    the classical baselines."""
    return np.stack(
        [np.concatenate([b.thumbnail, b.stats_style]) for b in bundles]
    )


def presence_matrix(bundles: Sequence[FeatureBundle], which: str, vocab_size: int) -> np.ndarray:
    """Bag-of-index presence vectors for a text field (baseline input)."""
    out = np.zeros((len(bundles), vocab_size), dtype=np.float64)
    for i, b in enumerate(bundles):
        ids = b.title_ids if which == "title" else b.tag_ids
        for j in ids:
            if j > 1:  # skip PAD and UNK
                out[i, j] = 1.0
    return out
