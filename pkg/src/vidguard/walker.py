"""Keyword-seeded random walks over live or fixture recommendations.

Simulates a viewer who searches for a keyword, picks one of the top ten
results uniformly, and then follows uniformly random recommendations for
up to ten hops, classifying every visited video. Includes keyword
sanitization, k-means keyword clustering, and the cumulative per-hop hit
report.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from .core import BinaryLabel, VideoRecord
from .features.text import Vocabulary, tokenize, tokenize_and_stem
from .ingestion import MetadataProvider, ProviderError

Classifier = Callable[[VideoRecord], BinaryLabel]

DEFAULT_HOPS = 10
DEFAULT_TOP_K = 10


# -- keyword handling ---------------------------------------------------


def sanitize_keywords(
    keywords: Sequence[str], bad_words: frozenset[str]
) -> tuple[list[str], list[str]]:
    """Strip dictionary words from each keyword.

    Returns (sanitized keywords, dropped keywords); a keyword is dropped
    when every one of its tokens is in the dictionary.
    """
    kept = []
    dropped = []
    for keyword in keywords:
        tokens = [t for t in tokenize(keyword) if t not in bad_words]
        if tokens:
            kept.append(" ".join(tokens))
        else:
            dropped.append(keyword)
    return kept, dropped


@dataclass(frozen=True)
class KeywordCluster:
    cluster_id: int
    name: str
    keywords: tuple[str, ...]


def cluster_keywords(
    keywords: Sequence[str],
    k: int = 5,
    seed: int = 0,
    names: Optional[dict[int, str]] = None,
) -> list[KeywordCluster]:
    """k-means over bag-of-stems term-frequency vectors.

    Deterministic given ``seed``; cluster names come from a human-assigned
    mapping (cluster id -> name) applied afterwards.
    """
    from sklearn.cluster import KMeans

    keywords = list(keywords)
    if k > len(keywords):
        raise ValueError(f"k={k} exceeds the number of keywords ({len(keywords)})")
    stem_lists = [tokenize_and_stem(kw) for kw in keywords]
    vocab = Vocabulary.build(stem_lists)
    X = np.zeros((len(keywords), vocab.size))
    for i, stems in enumerate(stem_lists):
        for s in stems:
            X[i, vocab.index[s]] += 1.0
    assignments = KMeans(n_clusters=k, n_init=10, random_state=seed).fit_predict(X)
    clusters = []
    for cid in range(k):
        members = tuple(kw for kw, a in zip(keywords, assignments) if a == cid)
        clusters.append(
            KeywordCluster(cid, (names or {}).get(cid, f"cluster-{cid}"), members)
        )
    return clusters


def load_cluster_names(path: Union[str, Path]) -> dict[int, str]:
    """``cluster_id<TAB>name`` lines."""
    names = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                cid, name = line.rstrip("\n").split("\t", 1)
                names[int(cid)] = name
    return names


# -- walks --------------------------------------------------------------


@dataclass
class WalkTrace:
    """One walk: the seed keyword, visits in order, and per-visit labels."""

    keyword: str
    rng_seed: int
    visits: list[str] = field(default_factory=list)
    labels: list[BinaryLabel] = field(default_factory=list)
    end_reason: str = "completed"

    @property
    def first_hit_hop(self) -> Optional[int]:
        """Hop index (0 = the search result) of the first inappropriate
        visit, or None for a clean walk."""
        for i, label in enumerate(self.labels):
            if label == BinaryLabel.INAPPROPRIATE:
                return i
        return None

    def to_dict(self) -> dict:
        return {
            "keyword": self.keyword,
            "rng_seed": self.rng_seed,
            "visits": self.visits,
            "labels": [l.value for l in self.labels],
            "end_reason": self.end_reason,
            "first_hit_hop": self.first_hit_hop,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WalkTrace":
        return cls(
            keyword=d["keyword"],
            rng_seed=d["rng_seed"],
            visits=list(d["visits"]),
            labels=[BinaryLabel(l) for l in d["labels"]],
            end_reason=d.get("end_reason", "completed"),
        )


def random_walk(
    keyword: str,
    hops: int,
    provider: MetadataProvider,
    classify: Classifier,
    seed: int,
    top_k: int = DEFAULT_TOP_K,
    avoid_revisits: bool = False,
) -> WalkTrace:
    """Walk up to ``hops`` recommendation steps from a keyword search.

    The start is uniform among the top ``top_k`` search results; each hop
    picks uniformly among the current video's recommendations, redrawing
    among the rest when a pick is unfetchable. Revisits are allowed by
    default (a naive viewer holds no history).
    """
    rng = np.random.default_rng(seed)
    trace = WalkTrace(keyword=keyword, rng_seed=seed)
    try:
        results = provider.search(keyword, top_k)
    except ProviderError:
        results = []
    if not results:
        trace.end_reason = "empty_search_results"
        return trace
    current = results[rng.integers(len(results))]
    trace.visits.append(current.video_id)
    trace.labels.append(classify(current))

    for _hop in range(hops):
        try:
            recs = provider.recommendations(current.video_id, DEFAULT_TOP_K)
        except ProviderError:
            trace.end_reason = "recommendations_unavailable"
            return trace
        if avoid_revisits:
            recs = [r for r in recs if r not in trace.visits]
        if not recs:
            trace.end_reason = "dead_end"
            return trace
        remaining = list(recs)
        picked = None
        while remaining:
            choice = remaining.pop(int(rng.integers(len(remaining))))
            try:
                picked = provider.fetch(choice)
                break
            except ProviderError:
                continue
        if picked is None:
            trace.end_reason = "dead_end"
            return trace
        current = picked
        trace.visits.append(current.video_id)
        trace.labels.append(classify(current))
    return trace


def _walk_seed(master_seed: int, keyword: str, walk_index: int) -> int:
    digest = hashlib.sha256(
        f"{master_seed}\x00{keyword}\x00{walk_index}".encode()
    ).digest()
    return int.from_bytes(digest[:8], "big")


def run_campaign(
    keywords: Sequence[str],
    walks_per_keyword: int,
    hops: int,
    provider: MetadataProvider,
    classify: Classifier,
    master_seed: int = 0,
    top_k: int = DEFAULT_TOP_K,
    avoid_revisits: bool = False,
    trace_log: Optional[Union[str, Path]] = None,
) -> list[WalkTrace]:
    """Independently seeded walks per keyword; resumable via the trace log.

    Each walk owns a private RNG stream derived from (master seed, keyword,
    walk index), so reruns against a fixture reproduce the campaign exactly
    and partial logs can be continued.
    """
    done: set[tuple[str, int]] = set()
    traces: list[WalkTrace] = []
    log_path = Path(trace_log) if trace_log else None
    if log_path and log_path.exists():
        with open(log_path, encoding="utf-8") as f:
            for line in f:
                if line.strip():
                    trace = WalkTrace.from_dict(json.loads(line))
                    traces.append(trace)
                    done.add((trace.keyword, trace.rng_seed))
    log_file = open(log_path, "a", encoding="utf-8") if log_path else None
    try:
        for keyword in keywords:
            for i in range(walks_per_keyword):
                seed = _walk_seed(master_seed, keyword, i)
                if (keyword, seed) in done:
                    continue
                trace = random_walk(
                    keyword, hops, provider, classify, seed,
                    top_k=top_k, avoid_revisits=avoid_revisits,
                )
                traces.append(trace)
                if log_file:
                    log_file.write(json.dumps(trace.to_dict(), ensure_ascii=False) + "\n")
    finally:
        if log_file:
            log_file.close()
    return traces


def hop_report(
    traces: Iterable[WalkTrace],
    grouping: Optional[Callable[[WalkTrace], str]] = None,
    hops: int = DEFAULT_HOPS,
) -> dict[str, list[float]]:
    """Cumulative percentage of walks with >= 1 inappropriate visit per hop.

    A walk contributes from its first inappropriate visit onward, so every
    group's sequence over hops 0..hops is non-decreasing. Empty groups are
    flagged with an all-zero row.
    """
    groups: dict[str, list[WalkTrace]] = {}
    for trace in traces:
        key = grouping(trace) if grouping else trace.keyword
        groups.setdefault(key, []).append(trace)
    report = {}
    for key, members in groups.items():
        n = len(members)
        row = []
        for hop in range(hops + 1):
            hits = sum(
                1
                for t in members
                if t.first_hit_hop is not None and t.first_hit_hop <= hop
            )
            row.append(100.0 * hits / n if n else 0.0)
        report[key] = row
    return report


def cluster_grouping(clusters: Sequence[KeywordCluster]) -> Callable[[WalkTrace], str]:
    by_keyword = {
        kw: cluster.name for cluster in clusters for kw in cluster.keywords
    }
    return lambda trace: by_keyword.get(trace.keyword, "unclustered")


def hop_report_tsv(report: dict[str, list[float]]) -> str:
    hops = max((len(v) for v in report.values()), default=1) - 1
    lines = ["group\t" + "\t".join(f"hop_{i}" for i in range(hops + 1))]
    for key in sorted(report):
        lines.append(key + "\t" + "\t".join(f"{v:.3f}" for v in report[key]))
    return "\n".join(lines) + "\n"


def model_classifier(pipeline, threshold: float = 0.5) -> Classifier:
    """Adapter: a trained binary pipeline as a walk-time classifier."""
    classes = list(pipeline.classes_)
    inapp_col = classes.index(BinaryLabel.INAPPROPRIATE)

    def classify(record: VideoRecord) -> BinaryLabel:
        proba = pipeline.predict_proba_records([record])[0]
        return (
            BinaryLabel.INAPPROPRIATE
            if proba[inapp_col] >= threshold
            else BinaryLabel.APPROPRIATE
        )

    return classify
