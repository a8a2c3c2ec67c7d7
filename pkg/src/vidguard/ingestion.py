"""Seed collection, snowball expansion, and availability auditing.

All acquisition goes through a pluggable MetadataProvider: a live API
client, an in-memory provider for tests, or a replay fixture directory for
fully offline runs.
"""

from __future__ import annotations

import json
import threading
import time
import urllib.parse
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional, Protocol, Sequence, Union

from .core import (
    Availability,
    Dataset,
    Edge,
    Label,
    VideoRecord,
    utcnow,
)


class ProviderError(RuntimeError):
    """Transport or quota failure from the metadata provider."""


class MetadataProvider(Protocol):
    def search(self, keyword: str, n: int) -> list[VideoRecord]: ...

    def channel_uploads(self, channel_id: str) -> list[VideoRecord]: ...

    def random_sample(self, n: int) -> list[VideoRecord]: ...

    def popular(self, region: str, window: Optional[str] = None) -> list[VideoRecord]: ...

    def recommendations(self, video_id: str, n: int) -> list[str]: ...

    def fetch(self, video_id: str) -> VideoRecord: ...


@dataclass
class CrawlPlan:
    """Seed strategies plus the expansion parameters of the crawl."""

    keywords: Sequence[str] = ()
    channels: Sequence[str] = ()
    regions: Sequence[str] = ()
    random_count: int = 0
    fanout: int = 10
    depth: int = 3
    per_request_cap: int = 30
    parallelism: int = 4
    retry_attempts: int = 3
    retry_base_delay: float = 1.0

    def __post_init__(self):
        if self.fanout < 1:
            raise ValueError("fanout must be >= 1")
        if self.depth < 0:
            raise ValueError("depth must be >= 0")

    @property
    def has_strategy(self) -> bool:
        return bool(self.keywords or self.channels or self.regions or self.random_count)


def _with_retry(
    fn: Callable,
    attempts: int,
    base_delay: float,
    sleep: Callable[[float], None] = time.sleep,
):
    """Retry on ProviderError with exponential backoff."""
    last: Optional[Exception] = None
    for attempt in range(attempts):
        try:
            return fn()
        except ProviderError as exc:
            last = exc
            if attempt < attempts - 1:
                sleep(base_delay * (2**attempt))
    raise last  # type: ignore[misc]


@dataclass
class CollectReport:
    """Inputs whose requests failed after retries (partial-result report)."""

    failures: list[tuple[str, str]] = field(default_factory=list)  # (input, reason)


def collect_seeds(
    plan: CrawlPlan,
    provider: MetadataProvider,
    sleep: Callable[[float], None] = time.sleep,
) -> tuple[Dataset, CollectReport]:
    """Union of per-strategy seed sets, deduplicated by video id.

    Each record is tagged with its originating strategy. Failed inputs are
    listed in the report; the rest of the collection proceeds.
    """
    if not plan.has_strategy:
        raise ValueError("at least one seed strategy must be configured")
    dataset = Dataset()
    report = CollectReport()

    def run(tag: str, name: str, call: Callable[[], list[VideoRecord]]) -> None:
        try:
            records = _with_retry(call, plan.retry_attempts, plan.retry_base_delay, sleep)
        except ProviderError as exc:
            report.failures.append((f"{tag}:{name}", str(exc)))
            return
        for r in records:
            if r.seed_strategy is None:
                r = replace(r, seed_strategy=tag)
            dataset.add_record(r)

    for kw in plan.keywords:
        run("keyword", kw, lambda kw=kw: provider.search(kw, plan.per_request_cap))
    for ch in plan.channels:
        run("channel", ch, lambda ch=ch: provider.channel_uploads(ch))
    if plan.random_count:
        run("random", str(plan.random_count), lambda: provider.random_sample(plan.random_count))
    for region in plan.regions:
        run("popular", region, lambda region=region: provider.popular(region))
    return dataset, report


def snowball(
    seeds: Dataset,
    plan: CrawlPlan,
    provider: MetadataProvider,
    checkpoint_path: Optional[Union[str, Path]] = None,
    sleep: Callable[[float], None] = time.sleep,
) -> Dataset:
    """BFS over recommendations up to ``plan.depth`` hops from any seed.

    Every video is fetched at most once; edges carry the hop index at which
    they were discovered; unfetchable recommendations keep their edge and
    are marked unfetched. The visited set and dataset are mutated only by
    this (single writer) thread; provider calls may run concurrently.
    """
    dataset = Dataset()
    for r in seeds:
        dataset.add_record(r)
    frontier = list(dataset.records)
    start_hop = 1
    if checkpoint_path and Path(checkpoint_path).exists():
        dataset, frontier, start_hop = _load_checkpoint(checkpoint_path)

    fetch_lock = threading.Lock()

    def get_recs(vid: str) -> tuple[str, list[str], Optional[str]]:
        try:
            recs = _with_retry(
                lambda: provider.recommendations(vid, plan.fanout),
                plan.retry_attempts,
                plan.retry_base_delay,
                sleep,
            )
            return vid, recs[: plan.fanout], None
        except ProviderError as exc:
            return vid, [], str(exc)

    for hop in range(start_hop, plan.depth + 1):
        if not frontier:
            break
        with ThreadPoolExecutor(max_workers=plan.parallelism) as pool:
            results = list(pool.map(get_recs, frontier))
        next_frontier = []
        to_fetch = []
        for vid, recs, error in results:
            for rec in recs:
                dataset.add_edge(Edge(vid, rec, hop))
                if rec not in dataset and rec not in to_fetch:
                    to_fetch.append(rec)

        def do_fetch(rec: str) -> tuple[str, Optional[VideoRecord]]:
            try:
                record = _with_retry(
                    lambda: provider.fetch(rec),
                    plan.retry_attempts,
                    plan.retry_base_delay,
                    sleep,
                )
                return rec, record
            except ProviderError:
                return rec, None

        with ThreadPoolExecutor(max_workers=plan.parallelism) as pool:
            fetched = list(pool.map(do_fetch, to_fetch))
        for rec, record in fetched:
            if record is None:
                dataset.mark_unfetched(rec)
            else:
                dataset.add_record(record)
                next_frontier.append(rec)
        frontier = next_frontier
        if checkpoint_path:
            _save_checkpoint(checkpoint_path, dataset, frontier, hop + 1)
    return dataset


def _save_checkpoint(path, dataset: Dataset, frontier: list[str], next_hop: int) -> None:
    path = Path(path)
    data_dir = path.with_suffix(".data")
    dataset.save(data_dir)
    tmp = path.with_suffix(".tmp")
    tmp.write_text(
        json.dumps({"frontier": frontier, "next_hop": next_hop, "data_dir": str(data_dir)}),
        encoding="utf-8",
    )
    tmp.replace(path)


def _load_checkpoint(path) -> tuple[Dataset, list[str], int]:
    meta = json.loads(Path(path).read_text(encoding="utf-8"))
    return Dataset.load(meta["data_dir"]), meta["frontier"], meta["next_hop"]


@dataclass
class AvailabilityReport:
    per_class: dict  # label value -> {live, removed, age_restricted, unknown, mean_days_live}
    overall: dict

    def to_dict(self) -> dict:
        return {"per_class": self.per_class, "overall": self.overall}


def audit_availability(
    dataset: Dataset,
    provider: MetadataProvider,
    now=None,
) -> AvailabilityReport:
    """Refetch availability for every video and break it down per class.

    Provider failures are reported as unknown status rather than raised.
    Classes come from ground truth when present; otherwise only the overall
    row is populated.
    """
    now = now or utcnow()
    label_of = {
        vid: entry.final
        for vid, entry in dataset.ground_truth.items()
        if not entry.excluded
    }
    buckets: dict[str, list] = {label.value: [] for label in Label}
    overall: list = []
    for vid, record in dataset.records.items():
        try:
            fresh = provider.fetch(vid)
            status = fresh.availability.value
        except ProviderError:
            status = "unknown"
        days = None
        if record.published_at is not None:
            published = record.published_at
            if published.tzinfo is None:
                published = published.replace(tzinfo=now.tzinfo)
            days = (now - published).days
        item = (status, days)
        overall.append(item)
        if vid in label_of:
            buckets[label_of[vid].value].append(item)

    def summarize(items: list) -> dict:
        total = len(items)
        counts = {s: 0 for s in ("live", "removed", "age_restricted", "unknown")}
        day_values = []
        for status, days in items:
            counts[status] += 1
            if days is not None:
                day_values.append(days)
        fractions = {
            f"{s}_fraction": (counts[s] / total if total else 0.0) for s in counts
        }
        return {
            "count": total,
            **counts,
            **fractions,
            "mean_days_since_publication": (
                sum(day_values) / len(day_values) if day_values else None
            ),
        }

    return AvailabilityReport(
        per_class={label: summarize(items) for label, items in buckets.items()},
        overall=summarize(overall),
    )


# -- providers ----------------------------------------------------------


class InMemoryProvider:
    """Provider over a dictionary of records and a recommendation map."""

    def __init__(
        self,
        records: dict[str, VideoRecord],
        recommendations: Optional[dict[str, list[str]]] = None,
        search_results: Optional[dict[str, list[str]]] = None,
        channel_map: Optional[dict[str, list[str]]] = None,
        popular_map: Optional[dict[str, list[str]]] = None,
        random_ids: Sequence[str] = (),
    ):
        self.records = records
        self.recommendation_map = recommendations or {}
        self.search_results = search_results or {}
        self.channel_map = channel_map or {}
        self.popular_map = popular_map or {}
        self.random_ids = list(random_ids)
        self.fetch_count: dict[str, int] = {}

    def _get(self, video_id: str) -> VideoRecord:
        if video_id not in self.records:
            raise ProviderError(f"no such video: {video_id}")
        return self.records[video_id]

    def search(self, keyword: str, n: int) -> list[VideoRecord]:
        return [self._get(v) for v in self.search_results.get(keyword, [])[:n]]

    def channel_uploads(self, channel_id: str) -> list[VideoRecord]:
        return [self._get(v) for v in self.channel_map.get(channel_id, [])]

    def random_sample(self, n: int) -> list[VideoRecord]:
        return [self._get(v) for v in self.random_ids[:n]]

    def popular(self, region: str, window: Optional[str] = None) -> list[VideoRecord]:
        return [self._get(v) for v in self.popular_map.get(region, [])]

    def recommendations(self, video_id: str, n: int) -> list[str]:
        return self.recommendation_map.get(video_id, [])[:n]

    def fetch(self, video_id: str) -> VideoRecord:
        self.fetch_count[video_id] = self.fetch_count.get(video_id, 0) + 1
        return self._get(video_id)


def _slug(text: str) -> str:
    return urllib.parse.quote(text, safe="")


class ReplayProvider:
    """Replays canned responses from a fixture directory.

    Files are named by request kind and argument, e.g.
    ``search__peppa%20pig.json`` holding a list of record objects, or
    ``recommendations__VID.json`` holding a list of video ids. A missing
    file raises ProviderError, mirroring a live failure.
    """

    def __init__(self, directory: Union[str, Path]):
        self.directory = Path(directory)

    def _load(self, kind: str, arg: str):
        path = self.directory / f"{kind}__{_slug(arg)}.json"
        if not path.exists():
            raise ProviderError(f"no fixture for {kind}({arg!r})")
        return json.loads(path.read_text(encoding="utf-8"))

    def _records(self, payload) -> list[VideoRecord]:
        return [VideoRecord.from_dict(d) for d in payload]

    def search(self, keyword: str, n: int) -> list[VideoRecord]:
        return self._records(self._load("search", keyword))[:n]

    def channel_uploads(self, channel_id: str) -> list[VideoRecord]:
        return self._records(self._load("channel", channel_id))

    def random_sample(self, n: int) -> list[VideoRecord]:
        return self._records(self._load("random", "sample"))[:n]

    def popular(self, region: str, window: Optional[str] = None) -> list[VideoRecord]:
        return self._records(self._load("popular", region))

    def recommendations(self, video_id: str, n: int) -> list[str]:
        return list(self._load("recommendations", video_id))[:n]

    def fetch(self, video_id: str) -> VideoRecord:
        return VideoRecord.from_dict(self._load("fetch", video_id))


def write_replay_fixture(directory: Union[str, Path], provider: InMemoryProvider) -> None:
    """Dump an in-memory provider as a replay fixture directory."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    def dump(kind: str, arg: str, payload) -> None:
        path = directory / f"{kind}__{_slug(arg)}.json"
        path.write_text(json.dumps(payload, ensure_ascii=False), encoding="utf-8")

    for kw, ids in provider.search_results.items():
        dump("search", kw, [provider.records[v].to_dict() for v in ids])
    for ch, ids in provider.channel_map.items():
        dump("channel", ch, [provider.records[v].to_dict() for v in ids])
    for region, ids in provider.popular_map.items():
        dump("popular", region, [provider.records[v].to_dict() for v in ids])
    if provider.random_ids:
        dump("random", "sample", [provider.records[v].to_dict() for v in provider.random_ids])
    for vid, recs in provider.recommendation_map.items():
        dump("recommendations", vid, recs)
    for vid, record in provider.records.items():
        dump("fetch", vid, record.to_dict())


class RateLimiter:
    """Token bucket shared across provider calls."""

    def __init__(self, rate_per_s: float, burst: int = 1):
        self.rate = rate_per_s
        self.capacity = burst
        self.tokens = float(burst)
        self.updated = time.monotonic()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = time.monotonic()
                self.tokens = min(self.capacity, self.tokens + (now - self.updated) * self.rate)
                self.updated = now
                if self.tokens >= 1:
                    self.tokens -= 1
                    return
                wait = (1 - self.tokens) / self.rate
            time.sleep(wait)


class YouTubeDataProvider:
    """Live client for the platform metadata API with a rotating key pool.

    Credentials come from the environment (comma-separated key pool). All
    transport failures surface as ProviderError so callers can retry.
    """

    BASE = "https://www.googleapis.com/youtube/v3"

    def __init__(
        self,
        api_keys: Sequence[str],
        rate_limiter: Optional[RateLimiter] = None,
        session=None,
    ):
        if not api_keys:
            raise ValueError("at least one API key required")
        import requests

        self.api_keys = list(api_keys)
        self._key_index = 0
        self.rate_limiter = rate_limiter
        self.session = session or requests.Session()

    def _key(self) -> str:
        key = self.api_keys[self._key_index % len(self.api_keys)]
        self._key_index += 1
        return key

    def _get(self, endpoint: str, **params) -> dict:
        if self.rate_limiter:
            self.rate_limiter.acquire()
        params["key"] = self._key()
        try:
            resp = self.session.get(f"{self.BASE}/{endpoint}", params=params, timeout=30)
        except Exception as exc:
            raise ProviderError(str(exc)) from exc
        if resp.status_code != 200:
            raise ProviderError(f"{endpoint} -> HTTP {resp.status_code}")
        return resp.json()

    def _to_record(self, item: dict) -> VideoRecord:
        snippet = item.get("snippet", {})
        stats = item.get("statistics", {})
        details = item.get("contentDetails", {})
        thumbs = snippet.get("thumbnails", {})
        thumb = thumbs.get("high", thumbs.get("default", {})).get("url", "")
        return VideoRecord(
            video_id=item["id"] if isinstance(item["id"], str) else item["id"]["videoId"],
            title=snippet.get("title", ""),
            description=snippet.get("description", ""),
            tags=tuple(snippet.get("tags", ())),
            thumbnail_ref=thumb,
            category=str(snippet.get("categoryId", "")),
            duration_s=_parse_iso8601_duration(details.get("duration", "")),
            views=int(stats.get("viewCount", 0)),
            likes=int(stats.get("likeCount", 0)),
            dislikes=int(stats.get("dislikeCount", 0)),
            comments=int(stats.get("commentCount", 0)),
            availability=Availability.LIVE,
            fetched_at=utcnow(),
        )

    def search(self, keyword: str, n: int) -> list[VideoRecord]:
        data = self._get("search", part="snippet", q=keyword, maxResults=n, type="video")
        ids = [item["id"]["videoId"] for item in data.get("items", [])]
        return [self.fetch(v) for v in ids]

    def channel_uploads(self, channel_id: str) -> list[VideoRecord]:
        data = self._get(
            "search", part="snippet", channelId=channel_id, maxResults=50, type="video"
        )
        return [self.fetch(item["id"]["videoId"]) for item in data.get("items", [])]

    def random_sample(self, n: int) -> list[VideoRecord]:
        # the external random-id service is opaque; without it this strategy
        # is unavailable live
        raise ProviderError("random sampling requires an external id source")

    def popular(self, region: str, window: Optional[str] = None) -> list[VideoRecord]:
        data = self._get(
            "videos",
            part="snippet,statistics,contentDetails",
            chart="mostPopular",
            regionCode=region,
            maxResults=50,
        )
        return [self._to_record(item) for item in data.get("items", [])]

    def recommendations(self, video_id: str, n: int) -> list[str]:
        data = self._get(
            "search", part="snippet", relatedToVideoId=video_id, maxResults=n, type="video"
        )
        return [item["id"]["videoId"] for item in data.get("items", [])]

    def fetch(self, video_id: str) -> VideoRecord:
        data = self._get(
            "videos", part="snippet,statistics,contentDetails,status", id=video_id
        )
        items = data.get("items", [])
        if not items:
            # removed videos report a status instead of failing
            return VideoRecord(
                video_id=video_id,
                availability=Availability.REMOVED,
                fetched_at=utcnow(),
            )
        record = self._to_record(items[0])
        status = items[0].get("contentDetails", {}).get("contentRating", {})
        if status.get("ytRating") == "ytAgeRestricted":
            record = replace(record, availability=Availability.AGE_RESTRICTED)
        return record


def _parse_iso8601_duration(value: str) -> float:
    """PT#H#M#S -> seconds; empty or malformed -> 0."""
    import re

    m = re.fullmatch(
        r"P(?:\d+D)?T?(?:(\d+)H)?(?:(\d+)M)?(?:(\d+)S)?", value or ""
    )
    if not m:
        return 0.0
    h, mi, s = (int(g) if g else 0 for g in m.groups())
    return float(h * 3600 + mi * 60 + s)
