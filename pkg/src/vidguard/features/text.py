"""Text preprocessing: tokenization, Porter stemming, vocabularies.

The same tokenization rule set feeds the stem-frequency reports, the style
features (so Jaccard similarities stay consistent), and the index encodings
consumed by the embedding layers.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

_TOKEN_SPLIT = re.compile(r"[^a-z0-9]+")

_VOWELS = "aeiou"


class PorterStemmer:
    """Porter's 1980 suffix-stripping algorithm.

    Operates on lowercase alphabetic words; words of length <= 2 and tokens
    containing digits are returned unchanged.
    """

    def stem(self, word: str) -> str:
        if len(word) <= 2 or not word.isalpha():
            return word
        word = self._step1a(word)
        word = self._step1b(word)
        word = self._step1c(word)
        word = self._step2(word)
        word = self._step3(word)
        word = self._step4(word)
        word = self._step5(word)
        return word

    # -- letter classification -----------------------------------------

    def _is_cons(self, word: str, i: int) -> bool:
        c = word[i]
        if c in _VOWELS:
            return False
        if c == "y":
            return i == 0 or not self._is_cons(word, i - 1)
        return True

    def _measure(self, stem: str) -> int:
        """Number of vowel-consonant sequences in ``stem``."""
        m = 0
        prev_vowel = False
        for i in range(len(stem)):
            cons = self._is_cons(stem, i)
            if cons and prev_vowel:
                m += 1
            prev_vowel = not cons
        return m

    def _has_vowel(self, stem: str) -> bool:
        return any(not self._is_cons(stem, i) for i in range(len(stem)))

    def _double_cons(self, word: str) -> bool:
        return (
            len(word) >= 2
            and word[-1] == word[-2]
            and self._is_cons(word, len(word) - 1)
        )

    def _cvc(self, word: str) -> bool:
        """Ends consonant-vowel-consonant, final consonant not w, x, or y."""
        if len(word) < 3:
            return False
        return (
            self._is_cons(word, len(word) - 3)
            and not self._is_cons(word, len(word) - 2)
            and self._is_cons(word, len(word) - 1)
            and word[-1] not in "wxy"
        )

    # -- steps ----------------------------------------------------------

    def _step1a(self, w: str) -> str:
        if w.endswith("sses"):
            return w[:-2]
        if w.endswith("ies"):
            return w[:-2]
        if w.endswith("ss"):
            return w
        if w.endswith("s"):
            return w[:-1]
        return w

    def _step1b(self, w: str) -> str:
        if w.endswith("eed"):
            if self._measure(w[:-3]) > 0:
                return w[:-1]
            return w
        stripped = None
        if w.endswith("ed") and self._has_vowel(w[:-2]):
            stripped = w[:-2]
        elif w.endswith("ing") and self._has_vowel(w[:-3]):
            stripped = w[:-3]
        if stripped is None:
            return w
        if stripped.endswith(("at", "bl", "iz")):
            return stripped + "e"
        if self._double_cons(stripped) and stripped[-1] not in "lsz":
            return stripped[:-1]
        if self._measure(stripped) == 1 and self._cvc(stripped):
            return stripped + "e"
        return stripped

    def _step1c(self, w: str) -> str:
        if w.endswith("y") and self._has_vowel(w[:-1]):
            return w[:-1] + "i"
        return w

    _STEP2 = [
        ("ational", "ate"), ("tional", "tion"), ("enci", "ence"),
        ("anci", "ance"), ("izer", "ize"), ("abli", "able"),
        ("alli", "al"), ("entli", "ent"), ("eli", "e"), ("ousli", "ous"),
        ("ization", "ize"), ("ation", "ate"), ("ator", "ate"),
        ("alism", "al"), ("iveness", "ive"), ("fulness", "ful"),
        ("ousness", "ous"), ("aliti", "al"), ("iviti", "ive"),
        ("biliti", "ble"),
    ]

    _STEP3 = [
        ("icate", "ic"), ("ative", ""), ("alize", "al"), ("iciti", "ic"),
        ("ical", "ic"), ("ful", ""), ("ness", ""),
    ]

    _STEP4 = [
        "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement",
        "ment", "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive",
        "ize",
    ]

    def _rule_list(self, w: str, rules, min_measure: int) -> str:
        for suffix, repl in rules:
            if w.endswith(suffix):
                stem = w[: -len(suffix)]
                if self._measure(stem) > min_measure:
                    return stem + repl
                return w
        return w

    def _step2(self, w: str) -> str:
        return self._rule_list(w, self._STEP2, 0)

    def _step3(self, w: str) -> str:
        return self._rule_list(w, self._STEP3, 0)

    def _step4(self, w: str) -> str:
        for suffix in self._STEP4:
            if w.endswith(suffix):
                stem = w[: -len(suffix)]
                if self._measure(stem) <= 1:
                    return w
                if suffix == "ion" and (not stem or stem[-1] not in "st"):
                    return w
                return stem
        return w

    def _step5(self, w: str) -> str:
        if w.endswith("e"):
            stem = w[:-1]
            m = self._measure(stem)
            if m > 1 or (m == 1 and not self._cvc(stem)):
                w = stem
        if self._measure(w) > 1 and self._double_cons(w) and w.endswith("l"):
            w = w[:-1]
        return w


_STEMMER = PorterStemmer()


def tokenize(text: str) -> list[str]:
    """Lowercase and split on runs of non-alphanumeric characters."""
    return [t for t in _TOKEN_SPLIT.split(text.lower()) if t]


def tokenize_and_stem(text: str) -> list[str]:
    """Tokenize then Porter-stem each token."""
    return [_STEMMER.stem(t) for t in tokenize(text)]


def jaccard(a: set, b: set) -> float:
    """|a ∩ b| / |a ∪ b|, with 0.0 when both sets are empty."""
    if not a and not b:
        return 0.0
    return len(a & b) / len(a | b)


PAD = 0
UNK = 1


@dataclass(frozen=True)
class Vocabulary:
    """Token-to-index map with reserved PAD=0 and UNK=1 slots."""

    index: dict[str, int]

    @property
    def size(self) -> int:
        return len(self.index) + 2

    @classmethod
    def build(cls, token_lists: Iterable[Sequence[str]]) -> "Vocabulary":
        """One index per distinct token, by descending frequency then
        lexicographic order; deterministic across runs."""
        counts = Counter()
        for tokens in token_lists:
            counts.update(tokens)
        ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        return cls({tok: i + 2 for i, (tok, _) in enumerate(ordered)})

    def encode(self, tokens: Sequence[str], max_len: int) -> list[int]:
        """Map tokens to indices (OOV -> UNK), right-pad with PAD, and
        truncate to the first ``max_len`` tokens."""
        if max_len < 1:
            raise ValueError("max_len must be >= 1")
        ids = [self.index.get(t, UNK) for t in tokens[:max_len]]
        ids.extend([PAD] * (max_len - len(ids)))
        return ids

    def to_dict(self) -> dict:
        return dict(self.index)

    @classmethod
    def from_dict(cls, d: dict) -> "Vocabulary":
        return cls({str(k): int(v) for k, v in d.items()})


def build_vocab(corpus: Iterable[str]) -> Vocabulary:
    """Vocabulary over the stemmed tokens of free-text entries."""
    return Vocabulary.build(tokenize_and_stem(text) for text in corpus)


def build_tag_vocab(tag_lists: Iterable[Sequence[str]]) -> Vocabulary:
    """Vocabulary over stemmed tokens of tag lists (one token per tag word)."""
    return Vocabulary.build(
        [s for tag in tags for s in tokenize_and_stem(tag)] for tags in tag_lists
    )


def encode_text(text: str, vocab: Vocabulary, max_len: int) -> list[int]:
    return vocab.encode(tokenize_and_stem(text), max_len)


def encode_tags(tags: Sequence[str], vocab: Vocabulary, max_len: int) -> list[int]:
    tokens = [s for tag in tags for s in tokenize_and_stem(tag)]
    return vocab.encode(tokens, max_len)
