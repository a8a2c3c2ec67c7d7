"""Hand-crafted style features from a video's metadata.

Lengths, ratios, punctuation/emoticon counts, dictionary hits, and Jaccard
similarities between the textual fields. The style vector also carries the
one-hot platform category and the four raw statistics counts.
"""

from __future__ import annotations

import re
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from ..core import VideoRecord
from .text import jaccard, tokenize

# Unicode emoji blocks, matched in addition to the western-style patterns.
_EMOJI = re.compile(
    "["
    "\U0001f300-\U0001f5ff"
    "\U0001f600-\U0001f64f"
    "\U0001f680-\U0001f6ff"
    "\U0001f900-\U0001f9ff"
    "☀-➿"
    "]"
)


def load_dictionary(path: Union[str, Path]) -> frozenset[str]:
    """One lowercase term per line; blank lines and '#' comments ignored."""
    terms = set()
    with open(path, encoding="utf-8") as f:
        for line in f:
            term = line.strip().lower()
            if term and not term.startswith("#"):
                terms.add(term)
    return frozenset(terms)


def _bundled(name: str) -> frozenset[str]:
    text = resources.files("vidguard.data").joinpath(name).read_text("utf-8")
    return frozenset(l.strip().lower() for l in text.splitlines() if l.strip())


def default_bad_words() -> frozenset[str]:
    return _bundled("bad_words.txt")


def default_child_words() -> frozenset[str]:
    return _bundled("child_words.txt")


def default_emoticons() -> tuple[str, ...]:
    text = resources.files("vidguard.data").joinpath("emoticons.txt").read_text("utf-8")
    return tuple(l.strip() for l in text.splitlines() if l.strip())


def count_emoticons(text: str, patterns: Sequence[str]) -> int:
    n = sum(text.count(p) for p in patterns)
    n += len(_EMOJI.findall(text))
    return n


def _dict_hits(tokens: Iterable[str], dictionary: frozenset[str]) -> int:
    return sum(1 for t in tokens if t in dictionary)


class StyleFeaturizer:
    """Pure VideoRecord -> vector mapping; identical inputs give identical
    vectors. Ratios are smoothed as x/(y+1) so zero denominators stay finite.
    """

    def __init__(
        self,
        categories: Sequence[str] = (),
        bad_words: Optional[frozenset[str]] = None,
        child_words: Optional[frozenset[str]] = None,
        emoticons: Optional[Sequence[str]] = None,
    ):
        self.categories = list(dict.fromkeys(categories))
        self.bad_words = bad_words if bad_words is not None else default_bad_words()
        self.child_words = child_words if child_words is not None else default_child_words()
        self.emoticons = tuple(emoticons) if emoticons is not None else default_emoticons()

    @property
    def feature_names(self) -> list[str]:
        names = ["views", "likes", "dislikes", "comments"]
        names += [f"category={c}" for c in self.categories]
        names.append("category=<unknown>")
        names += [
            "duration_s",
            "like_dislike_ratio",
            "title_len",
            "description_len",
            "description_title_ratio",
            "jaccard_title_description",
            "exclaim_title",
            "question_title",
            "exclaim_description",
            "question_description",
            "emoticons_title",
            "emoticons_description",
            "bad_words_title",
            "bad_words_description",
            "bad_words_tags",
            "child_words_title",
            "child_words_description",
            "child_words_tags",
            "tag_count",
            "jaccard_tags_title",
        ]
        return names

    @property
    def size(self) -> int:
        return len(self.feature_names)

    def __call__(self, r: VideoRecord) -> np.ndarray:
        title_tokens = tokenize(r.title)
        desc_tokens = tokenize(r.description)
        tag_tokens = [t for tag in r.tags for t in tokenize(tag)]

        one_hot = np.zeros(len(self.categories) + 1)
        try:
            one_hot[self.categories.index(r.category)] = 1.0
        except ValueError:
            one_hot[-1] = 1.0

        values = [float(r.views), float(r.likes), float(r.dislikes), float(r.comments)]
        values.extend(one_hot)
        values.extend(
            [
                float(r.duration_s),
                r.likes / (r.dislikes + 1),
                float(len(r.title)),
                float(len(r.description)),
                len(r.description) / (len(r.title) + 1),
                jaccard(set(title_tokens), set(desc_tokens)),
                float(r.title.count("!")),
                float(r.title.count("?")),
                float(r.description.count("!")),
                float(r.description.count("?")),
                float(count_emoticons(r.title, self.emoticons)),
                float(count_emoticons(r.description, self.emoticons)),
                float(_dict_hits(title_tokens, self.bad_words)),
                float(_dict_hits(desc_tokens, self.bad_words)),
                float(_dict_hits(tag_tokens, self.bad_words)),
                float(_dict_hits(title_tokens, self.child_words)),
                float(_dict_hits(desc_tokens, self.child_words)),
                float(_dict_hits(tag_tokens, self.child_words)),
                float(len(r.tags)),
                jaccard(set(tag_tokens), set(title_tokens)),
            ]
        )
        vec = np.asarray(values, dtype=np.float64)
        assert np.all(np.isfinite(vec))
        return vec
