"""Descriptive reports over the labeled dataset.

Top-stem per-class proportion tables for titles/tags, empirical engagement
CDFs per class, and the availability audit breakdown. All reports are
emitted as tab-separated tables for downstream plotting.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from typing import Iterable

from ..core import Dataset, Label
from .text import tokenize_and_stem


def term_report(
    dataset: Dataset, field: str = "title", top_k: int = 15
) -> list[dict]:
    """Top stems by document frequency with per-class proportions.

    For each stem, the fraction of videos containing it that fall in each
    class; fractions per stem sum to 1.
    """
    if field not in ("title", "tags"):
        raise ValueError(f"unknown field: {field}")
    doc_freq = Counter()
    class_freq: dict[str, Counter] = defaultdict(Counter)
    for record, label in dataset.labeled_records():
        if field == "title":
            stems = set(tokenize_and_stem(record.title))
        else:
            stems = {s for tag in record.tags for s in tokenize_and_stem(tag)}
        for stem in stems:
            doc_freq[stem] += 1
            class_freq[stem][label] += 1
    rows = []
    ordered = sorted(doc_freq.items(), key=lambda kv: (-kv[1], kv[0]))[:top_k]
    for stem, count in ordered:
        proportions = {
            label: class_freq[stem][label] / count for label in Label
        }
        rows.append({"stem": stem, "videos": count, "proportions": proportions})
    return rows


def like_fraction(likes: int, dislikes: int) -> float:
    """likes / (likes + dislikes); 0 when the video has no reactions."""
    total = likes + dislikes
    return likes / total if total else 0.0


def _ecdf(values: list[float]) -> list[tuple[float, float]]:
    """Empirical CDF points (value, cumulative fraction) over sorted values."""
    if not values:
        return []
    values = sorted(values)
    n = len(values)
    points = []
    for i, v in enumerate(values, start=1):
        # keep only the last point per distinct value
        if points and points[-1][0] == v:
            points[-1] = (v, i / n)
        else:
            points.append((v, i / n))
    return points


def engagement_report(dataset: Dataset) -> dict[str, dict[Label, list[tuple[float, float]]]]:
    """Per-class empirical CDFs for views, like fraction, and comments/views."""
    metrics: dict[str, dict[Label, list[float]]] = {
        "views": defaultdict(list),
        "like_fraction": defaultdict(list),
        "comments_per_view": defaultdict(list),
    }
    for record, label in dataset.labeled_records():
        metrics["views"][label].append(float(record.views))
        metrics["like_fraction"][label].append(like_fraction(record.likes, record.dislikes))
        metrics["comments_per_view"][label].append(
            record.comments / record.views if record.views else 0.0
        )
    return {
        name: {label: _ecdf(vals) for label, vals in per_class.items()}
        for name, per_class in metrics.items()
    }


def term_report_tsv(rows: Iterable[dict]) -> str:
    header = ["stem", "videos"] + [l.value for l in Label]
    lines = ["\t".join(header)]
    for row in rows:
        cells = [row["stem"], str(row["videos"])]
        cells += [f"{row['proportions'][l]:.6f}" for l in Label]
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"


def engagement_report_tsv(report: dict) -> str:
    lines = ["metric\tclass\tvalue\tcum_fraction"]
    for metric, per_class in report.items():
        for label, points in per_class.items():
            for value, frac in points:
                lines.append(f"{metric}\t{label.value}\t{value:g}\t{frac:.6f}")
    return "\n".join(lines) + "\n"
