from __future__ import annotations

from datetime import datetime, timezone

import numpy as np
import pytest

from vidguard.core import (
    Availability,
    BinaryLabel,
    Dataset,
    GroundTruthEntry,
    Label,
    VideoRecord,
)


# Verdict lines recorded by the acceptance tests; echoed in the terminal
# summary because output capture would otherwise hide them under `pytest -v`.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_record(video_id="v1", **overrides) -> VideoRecord:
    defaults = dict(
        video_id=video_id,
        title="peppa pig funny video",
        description="a nice video for kids",
        tags=("peppa", "kids"),
        thumbnail_ref="",
        category="24",
        duration_s=120.0,
        views=1000,
        likes=50,
        dislikes=5,
        comments=10,
        published_at=datetime(2018, 6, 1, tzinfo=timezone.utc),
        availability=Availability.LIVE,
        fetched_at=datetime(2019, 1, 1, tzinfo=timezone.utc),
    )
    defaults.update(overrides)
    return VideoRecord(**defaults)


@pytest.fixture
def record_factory():
    return make_record


def synthetic_labeled_records(n=400, seed=0, signal_word="scary"):
    """Binary set where one style feature (bad-word count in the title)
    fully separates the classes."""
    rng = np.random.default_rng(seed)
    words = ["peppa", "pig", "song", "fun", "learn", "colors", "video", "toys"]
    records, labels = [], []
    for i in range(n):
        inappropriate = i % 2 == 0
        title = " ".join(rng.choice(words, 4))
        if inappropriate:
            title = f"{signal_word} {title}"
        records.append(
            make_record(
                video_id=f"s{i}",
                title=title,
                description="description " * int(rng.integers(1, 4)),
                tags=("kids", "cartoon"),
                views=int(rng.integers(100, 10**6)),
                likes=int(rng.integers(0, 1000)),
                dislikes=int(rng.integers(0, 100)),
                comments=int(rng.integers(0, 500)),
            )
        )
        labels.append(
            BinaryLabel.INAPPROPRIATE if inappropriate else BinaryLabel.APPROPRIATE
        )
    return records, labels


@pytest.fixture(scope="session")
def planted_signal_data():
    return synthetic_labeled_records()


def walk_fixture_provider():
    """Fixture recommendation graph with a 0.1 per-hop chance of hitting
    inappropriate content: every node recommends nine appropriate videos
    and one inappropriate one; the search surfaces ten appropriate videos.
    """
    from vidguard.ingestion import InMemoryProvider

    records = {f"A{i}": make_record(f"A{i}") for i in range(10)}
    records["I0"] = make_record("I0")
    recs = [f"A{i}" for i in range(9)] + ["I0"]
    return InMemoryProvider(
        records,
        recommendations={vid: list(recs) for vid in records},
        search_results={"kids": [f"A{i}" for i in range(10)]},
    )


def label_by_prefix(record) -> BinaryLabel:
    if record.video_id.startswith("I"):
        return BinaryLabel.INAPPROPRIATE
    return BinaryLabel.APPROPRIATE


def labeled_dataset(per_class=3) -> Dataset:
    """Small four-class dataset with ground truth."""
    ds = Dataset()
    i = 0
    for label in Label:
        for _ in range(per_class):
            vid = f"{label.value}-{i}"
            ds.add_record(make_record(video_id=vid, title=f"{label.value} video {i}"))
            ds.ground_truth[vid] = GroundTruthEntry(vid, (label, label, label), label)
            i += 1
    return ds


@pytest.fixture
def small_labeled_dataset():
    return labeled_dataset()
