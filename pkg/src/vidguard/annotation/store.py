"""Vote storage, task assignment, and majority aggregation.

The store is an append-only event log; the current vote state and the
ground-truth export are pure folds over it. Duplicate submissions by the
same (video, annotator) pair overwrite, keeping the full history as audit
trail.
"""

from __future__ import annotations

import json
import threading
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

from ..core import (
    EXCLUDED,
    AnnotationRecord,
    Dataset,
    FinalLabel,
    GroundTruthEntry,
    Label,
    utcnow,
)

LABEL_DEFINITIONS = {
    "suitable": (
        "Appropriate for toddlers (1-5) and relevant to their typical "
        "interests: normal cartoons, children's songs, educational clips."
    ),
    "disturbing": (
        "Targets toddlers but contains sexual hints, inappropriate language, "
        "graphic nudity, abuse, horror sound effects, or scary scenes."
    ),
    "restricted": (
        "Inappropriate for viewers under 17 but not aimed at toddlers: "
        "explicit language, nudity, violence, gambling, drugs, alcohol."
    ),
    "irrelevant": (
        "Appropriate content that is not relevant to a toddler's interests "
        "(only suitable for older children, adolescents, or adults)."
    ),
}


class InsufficientRatersError(ValueError):
    pass


class UnknownAnnotatorError(KeyError):
    pass


def aggregate(votes: Sequence[Label]) -> FinalLabel:
    """Strict-plurality winner of >=3 votes, or EXCLUDED on full dissent.

    With more than three raters, a tie between top labels is also excluded.
    """
    if len(votes) < 3:
        raise InsufficientRatersError("insufficient raters: need >= 3 votes")
    counts = Counter(votes)
    ranked = counts.most_common()
    top, top_n = ranked[0]
    if top_n == 1:
        return EXCLUDED
    if len(ranked) > 1 and ranked[1][1] == top_n:
        return EXCLUDED
    return top


@dataclass(frozen=True)
class TaskPayload:
    """Everything an annotator needs to review one video."""

    video_id: str
    title: str
    thumbnail_ref: str
    tags: tuple[str, ...]
    description: str
    playback_url: str
    label_definitions: dict[str, str]

    def to_dict(self) -> dict:
        return {
            "video_id": self.video_id,
            "title": self.title,
            "thumbnail_ref": self.thumbnail_ref,
            "tags": list(self.tags),
            "description": self.description,
            "playback_url": self.playback_url,
            "label_definitions": dict(self.label_definitions),
        }


class AnnotationStore:
    """Append-only log of annotation events with single-writer submission.

    Tolerates benign assignment races: two annotators may receive the same
    task, never the same annotator twice.
    """

    def __init__(
        self,
        dataset: Dataset,
        annotators: Sequence[str] = (),
        log_path: Optional[Union[str, Path]] = None,
        playback_base: str = "https://www.youtube.com/watch?v=",
    ):
        self.dataset = dataset
        self.annotators: set[str] = set(annotators)
        self.playback_base = playback_base
        self._events: list[AnnotationRecord] = []
        self._current: dict[tuple[str, str], Label] = {}
        self._lock = threading.Lock()
        self._log_path = Path(log_path) if log_path else None
        if self._log_path and self._log_path.exists():
            with open(self._log_path, encoding="utf-8") as f:
                for line in f:
                    if line.strip():
                        self._apply(AnnotationRecord.from_dict(json.loads(line)))

    # -- annotators -----------------------------------------------------

    def register(self, annotator_id: str) -> None:
        with self._lock:
            self.annotators.add(annotator_id)

    def _check_annotator(self, annotator_id: str) -> None:
        if annotator_id not in self.annotators:
            raise UnknownAnnotatorError(annotator_id)

    # -- submission -----------------------------------------------------

    def _apply(self, record: AnnotationRecord) -> None:
        self._events.append(record)
        self._current[(record.video_id, record.annotator_id)] = record.label
        self.annotators.add(record.annotator_id)

    def submit(self, record: AnnotationRecord) -> None:
        self._check_annotator(record.annotator_id)
        if record.video_id not in self.dataset:
            raise KeyError(f"unknown video: {record.video_id}")
        if record.submitted_at is None:
            record = AnnotationRecord(
                record.video_id, record.annotator_id, record.label, utcnow()
            )
        with self._lock:
            self._apply(record)
            if self._log_path:
                with open(self._log_path, "a", encoding="utf-8") as f:
                    f.write(json.dumps(record.to_dict(), ensure_ascii=False) + "\n")

    # -- task assignment ------------------------------------------------

    def votes_for(self, video_id: str) -> list[Label]:
        return [
            label
            for (vid, _), label in self._current.items()
            if vid == video_id
        ]

    def next_task(self, annotator_id: str) -> Optional[TaskPayload]:
        """A video this annotator has not labeled yet, most-voted first so
        partially covered videos reach three votes sooner."""
        self._check_annotator(annotator_id)
        candidates = []
        for vid, record in self.dataset.records.items():
            if (vid, annotator_id) in self._current:
                continue
            candidates.append((-len(self.votes_for(vid)), vid, record))
        if not candidates:
            return None
        _, vid, record = min(candidates)
        return TaskPayload(
            video_id=vid,
            title=record.title,
            thumbnail_ref=record.thumbnail_ref,
            tags=record.tags,
            description=record.description,
            playback_url=self.playback_base + vid,
            label_definitions=LABEL_DEFINITIONS,
        )

    # -- aggregation ----------------------------------------------------

    def progress(self) -> dict:
        per_annotator = Counter(a for (_, a) in self._current)
        fully_voted = sum(
            1 for vid in self.dataset.records if len(self.votes_for(vid)) >= 3
        )
        return {
            "videos": len(self.dataset),
            "annotators": sorted(self.annotators),
            "votes_per_annotator": dict(per_annotator),
            "videos_with_3_votes": fully_voted,
            "events": len(self._events),
        }

    def export_ground_truth(self) -> tuple[list[GroundTruthEntry], int]:
        """(entries with a majority label, count of excluded videos).

        Only videos with >= 3 votes are aggregable.
        """
        entries = []
        excluded = 0
        for vid in self.dataset.records:
            votes = self.votes_for(vid)
            if len(votes) < 3:
                continue
            final = aggregate(votes)
            entry = GroundTruthEntry(vid, tuple(votes), final)
            if entry.excluded:
                excluded += 1
            else:
                entries.append(entry)
        return entries, excluded
