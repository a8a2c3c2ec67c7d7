"""Canonical data types shared by every stage of the pipeline.

Videos, labels, per-rater annotations, aggregated ground truth, and the
dataset container that bundles them with the recommendation edge list.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Optional, Union


class Label(str, Enum):
    """Four-class safety taxonomy for toddler-oriented video review."""

    SUITABLE = "suitable"
    DISTURBING = "disturbing"
    RESTRICTED = "restricted"
    IRRELEVANT = "irrelevant"


class BinaryLabel(str, Enum):
    """Two-class collapse used by the binary classifier and graph audit."""

    APPROPRIATE = "appropriate"
    INAPPROPRIATE = "inappropriate"


class Availability(str, Enum):
    LIVE = "live"
    REMOVED = "removed"
    AGE_RESTRICTED = "age_restricted"


#: Sentinel for videos whose raters disagreed pairwise. Deliberately not a
#: fifth Label: such videos are dropped from ground truth, never trained on.
EXCLUDED = "excluded"

FinalLabel = Union[Label, str]  # Label or the EXCLUDED sentinel


def collapse_label(label: Label) -> BinaryLabel:
    """Map the four-class taxonomy onto appropriate/inappropriate.

    suitable and irrelevant content is appropriate; disturbing and
    restricted content is inappropriate.
    """
    if label in (Label.SUITABLE, Label.IRRELEVANT):
        return BinaryLabel.APPROPRIATE
    return BinaryLabel.INAPPROPRIATE


def _parse_ts(value) -> Optional[datetime]:
    if value is None:
        return None
    if isinstance(value, datetime):
        return value
    return datetime.fromisoformat(value)


@dataclass(frozen=True)
class VideoRecord:
    """Metadata of a single platform video as returned by the metadata API."""

    video_id: str
    title: str = ""
    description: str = ""
    tags: tuple[str, ...] = ()
    thumbnail_ref: str = ""
    category: str = ""
    duration_s: float = 0.0
    views: int = 0
    likes: int = 0
    dislikes: int = 0
    comments: int = 0
    published_at: Optional[datetime] = None
    availability: Availability = Availability.LIVE
    fetched_at: Optional[datetime] = None
    seed_strategy: Optional[str] = None

    def to_dict(self) -> dict:
        d = {
            "video_id": self.video_id,
            "title": self.title,
            "description": self.description,
            "tags": list(self.tags),
            "thumbnail_ref": self.thumbnail_ref,
            "category": self.category,
            "duration_s": self.duration_s,
            "views": self.views,
            "likes": self.likes,
            "dislikes": self.dislikes,
            "comments": self.comments,
            "published_at": self.published_at.isoformat() if self.published_at else None,
            "availability": self.availability.value,
            "fetched_at": self.fetched_at.isoformat() if self.fetched_at else None,
            "seed_strategy": self.seed_strategy,
        }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "VideoRecord":
        return cls(
            video_id=d["video_id"],
            title=d.get("title", ""),
            description=d.get("description", ""),
            tags=tuple(d.get("tags", ())),
            thumbnail_ref=d.get("thumbnail_ref", ""),
            category=str(d.get("category", "")),
            duration_s=float(d.get("duration_s", 0.0)),
            views=int(d.get("views", 0)),
            likes=int(d.get("likes", 0)),
            dislikes=int(d.get("dislikes", 0)),
            comments=int(d.get("comments", 0)),
            published_at=_parse_ts(d.get("published_at")),
            availability=Availability(d.get("availability", "live")),
            fetched_at=_parse_ts(d.get("fetched_at")),
            seed_strategy=d.get("seed_strategy"),
        )


def validate_record(record: VideoRecord) -> list[str]:
    """Return every violated invariant of ``record``; empty list means ok.

    Violations are data, not exceptions: callers decide whether to skip,
    repair, or abort.
    """
    violations = []
    if not record.video_id:
        violations.append("empty id")
    for name in ("views", "likes", "dislikes", "comments"):
        if getattr(record, name) < 0:
            violations.append(f"negative count: {name}")
    if record.duration_s < 0:
        violations.append("negative duration")
    if not isinstance(record.availability, Availability):
        violations.append("invalid availability")
    return violations


@dataclass(frozen=True)
class AnnotationRecord:
    """One rater's judgment on one video."""

    video_id: str
    annotator_id: str
    label: Label
    submitted_at: Optional[datetime] = None

    def to_dict(self) -> dict:
        return {
            "video_id": self.video_id,
            "annotator_id": self.annotator_id,
            "label": self.label.value,
            "submitted_at": self.submitted_at.isoformat() if self.submitted_at else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AnnotationRecord":
        return cls(
            video_id=d["video_id"],
            annotator_id=d["annotator_id"],
            label=Label(d["label"]),
            submitted_at=_parse_ts(d.get("submitted_at")),
        )


@dataclass(frozen=True)
class GroundTruthEntry:
    """Majority-aggregated label for one video, or EXCLUDED on full dissent."""

    video_id: str
    rater_labels: tuple[Label, ...]
    final: FinalLabel

    @property
    def excluded(self) -> bool:
        return self.final == EXCLUDED

    def to_dict(self) -> dict:
        return {
            "video_id": self.video_id,
            "rater_labels": [l.value for l in self.rater_labels],
            "final": self.final.value if isinstance(self.final, Label) else self.final,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GroundTruthEntry":
        raw = d["final"]
        final = raw if raw == EXCLUDED else Label(raw)
        return cls(
            video_id=d["video_id"],
            rater_labels=tuple(Label(l) for l in d["rater_labels"]),
            final=final,
        )


@dataclass(frozen=True)
class Edge:
    """A recommendation edge, with the crawl hop at which it was found."""

    from_id: str
    to_id: str
    hop: int


class Dataset:
    """Videos, optional ground truth, and the recommendation edge list.

    Records are immutable value objects; mutation of the container follows
    a single-writer discipline (concurrent readers are safe).
    """

    def __init__(
        self,
        records: Iterable[VideoRecord] = (),
        ground_truth: Iterable[GroundTruthEntry] = (),
        edges: Iterable[Edge] = (),
    ):
        self.records: dict[str, VideoRecord] = {}
        self.ground_truth: dict[str, GroundTruthEntry] = {}
        self._edges: dict[tuple[str, str], Edge] = {}
        self.unfetched: set[str] = set()
        for r in records:
            self.add_record(r)
        for g in ground_truth:
            self.ground_truth[g.video_id] = g
        for e in edges:
            self.add_edge(e)

    # -- mutation -------------------------------------------------------

    def add_record(self, record: VideoRecord) -> None:
        existing = self.records.get(record.video_id)
        if existing is not None:
            record = _later_fetch(existing, record)
        self.records[record.video_id] = record
        self.unfetched.discard(record.video_id)

    def add_edge(self, edge: Edge) -> None:
        key = (edge.from_id, edge.to_id)
        if key not in self._edges:
            self._edges[key] = edge
        for vid in key:
            if vid not in self.records:
                self.unfetched.add(vid)

    def mark_unfetched(self, video_id: str) -> None:
        if video_id not in self.records:
            self.unfetched.add(video_id)

    # -- access ---------------------------------------------------------

    @property
    def edges(self) -> list[Edge]:
        return list(self._edges.values())

    def __len__(self) -> int:
        return len(self.records)

    def __contains__(self, video_id: str) -> bool:
        return video_id in self.records

    def __iter__(self) -> Iterator[VideoRecord]:
        return iter(self.records.values())

    def labeled_records(self) -> list[tuple[VideoRecord, Label]]:
        """Pairs of (record, final label), skipping excluded entries."""
        out = []
        for vid, entry in self.ground_truth.items():
            if entry.excluded or vid not in self.records:
                continue
            out.append((self.records[vid], entry.final))
        return out

    # -- persistence ----------------------------------------------------

    def save(self, directory: Union[str, Path]) -> None:
        """Write nodes/ground truth as JSON lines and edges as TSV."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        with open(directory / "nodes.jsonl", "w", encoding="utf-8") as f:
            for r in self.records.values():
                f.write(json.dumps(r.to_dict(), ensure_ascii=False) + "\n")
        with open(directory / "edges.tsv", "w", encoding="utf-8") as f:
            for e in self._edges.values():
                f.write(f"{e.from_id}\t{e.to_id}\t{e.hop}\n")
        if self.ground_truth:
            with open(directory / "ground_truth.jsonl", "w", encoding="utf-8") as f:
                for g in self.ground_truth.values():
                    f.write(json.dumps(g.to_dict(), ensure_ascii=False) + "\n")

    @classmethod
    def load(cls, directory: Union[str, Path]) -> "Dataset":
        directory = Path(directory)
        ds = cls()
        nodes = directory / "nodes.jsonl"
        if nodes.exists():
            with open(nodes, encoding="utf-8") as f:
                for line in f:
                    if line.strip():
                        ds.add_record(VideoRecord.from_dict(json.loads(line)))
        edges = directory / "edges.tsv"
        if edges.exists():
            with open(edges, encoding="utf-8") as f:
                for line in f:
                    if line.strip():
                        a, b, hop = line.rstrip("\n").split("\t")
                        ds.add_edge(Edge(a, b, int(hop)))
        gt = directory / "ground_truth.jsonl"
        if gt.exists():
            with open(gt, encoding="utf-8") as f:
                for line in f:
                    if line.strip():
                        g = GroundTruthEntry.from_dict(json.loads(line))
                        ds.ground_truth[g.video_id] = g
        return ds


def _later_fetch(a: VideoRecord, b: VideoRecord) -> VideoRecord:
    """On id collision keep the record fetched later; fresher stats win."""
    ta = a.fetched_at or datetime.min.replace(tzinfo=timezone.utc)
    tb = b.fetched_at or datetime.min.replace(tzinfo=timezone.utc)
    if ta.tzinfo is None:
        ta = ta.replace(tzinfo=timezone.utc)
    if tb.tzinfo is None:
        tb = tb.replace(tzinfo=timezone.utc)
    return b if tb >= ta else a


def merge_datasets(a: Dataset, b: Dataset) -> Dataset:
    """Union two datasets by video id, deduplicating edges.

    Colliding ids keep whichever record was fetched later.
    """
    out = Dataset()
    for r in a.records.values():
        out.add_record(r)
    for r in b.records.values():
        out.add_record(r)
    for e in a.edges:
        out.add_edge(e)
    for e in b.edges:
        out.add_edge(e)
    for src in (a, b):
        for g in src.ground_truth.values():
            out.ground_truth[g.video_id] = g
        for vid in src.unfetched:
            out.mark_unfetched(vid)
    return out


def utcnow() -> datetime:
    return datetime.now(timezone.utc)
