"""Command-line entry point wiring all pipeline stages.

Every stage writes its artifacts atomically (temp file + rename) together
with a machine-readable run manifest; all randomness flows from one master
seed with per-stage sub-seeds derived by stable hashing of the stage name.

Exit codes: 0 success, 1 usage, 2 data error, 3 provider error.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Optional

import click

from . import __version__
from .core import (
    BinaryLabel,
    Dataset,
    Label,
    collapse_label,
    utcnow,
    validate_record,
)
from .ingestion import (
    CrawlPlan,
    ProviderError,
    RateLimiter,
    ReplayProvider,
    YouTubeDataProvider,
    audit_availability,
    collect_seeds,
    snowball,
)
from .model.config import TrainHyperparams
from .model.estimator import ModelFormatError, TrainedPipeline


class DataError(RuntimeError):
    """Invalid or missing input data for a stage."""


# -- config and manifest plumbing ---------------------------------------

_ENV_VAR = re.compile(r"\$\{([A-Za-z_][A-Za-z0-9_]*)\}")


def load_config(path) -> dict[str, str]:
    """Flat KEY=VALUE lines with ${ENV_VAR} interpolation for secrets."""
    config = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise DataError(f"{path}:{lineno}: expected KEY=VALUE, got {line!r}")
            key, value = line.split("=", 1)

            def expand(m):
                var = m.group(1)
                if var not in os.environ:
                    raise DataError(f"{path}:{lineno}: undefined environment variable {var}")
                return os.environ[var]

            config[key.strip()] = _ENV_VAR.sub(expand, value.strip())
    return config


def stage_seed(master_seed: int, stage: str) -> int:
    digest = hashlib.sha256(f"{master_seed}\x00{stage}".encode()).digest()
    return int.from_bytes(digest[:8], "big") % (2**31)


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    tmp.replace(path)


def write_manifest(directory, stage: str, inputs: dict, seed: Optional[int]) -> None:
    manifest = {
        "stage": stage,
        "inputs": {k: str(v) for k, v in inputs.items() if v is not None},
        "seed": seed,
        "version": __version__,
        "created_at": utcnow().isoformat(),
    }
    atomic_write_text(
        Path(directory) / f"{stage}.manifest.json", json.dumps(manifest, indent=2) + "\n"
    )


@contextmanager
def workspace_lock(directory):
    """One stage process at a time per workspace."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lock = directory / ".vidguard.lock"
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise DataError(f"workspace locked by another run: {lock}")
    try:
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        yield
    finally:
        lock.unlink(missing_ok=True)


def _provider(fixture: Optional[str], rate: Optional[float] = None):
    if fixture:
        return ReplayProvider(fixture)
    keys = os.environ.get("VIDGUARD_API_KEYS", "")
    if not keys:
        raise DataError(
            "no provider: pass --fixture or set VIDGUARD_API_KEYS (comma-separated)"
        )
    limiter = RateLimiter(rate) if rate else None
    return YouTubeDataProvider(keys.split(","), rate_limiter=limiter)


def _load_dataset(path) -> Dataset:
    path = Path(path)
    if not path.exists():
        raise DataError(f"dataset directory not found: {path}")
    ds = Dataset.load(path)
    if not len(ds):
        raise DataError(f"dataset at {path} contains no videos")
    return ds


def _read_lines(path) -> list[str]:
    with open(path, encoding="utf-8") as f:
        return [line.strip() for line in f if line.strip()]


def _load_label_file(path) -> dict[str, BinaryLabel]:
    labels = {}
    for lineno, line in enumerate(_read_lines(path), 1):
        parts = line.split("\t")
        if len(parts) < 2:
            raise DataError(f"{path}:{lineno}: expected video_id<TAB>label")
        labels[parts[0]] = BinaryLabel(parts[1])
    return labels


def _extractor_factory(cache_dir: Optional[str] = None):
    from .features.bundle import FeatureExtractor
    from .features.thumbnail import EmbeddingCache, HashEmbeddingProvider

    cache = EmbeddingCache(cache_dir) if cache_dir else None

    def factory():
        return FeatureExtractor(
            embedding_provider=HashEmbeddingProvider(), embedding_cache=cache
        )

    return factory


# -- commands -----------------------------------------------------------


@click.group()
def cli():
    """Toddler-safety video pipeline: collect, annotate, train, audit."""


@cli.command()
@click.option("--keywords", type=click.Path(exists=True), help="keyword list file")
@click.option("--channels", type=click.Path(exists=True), help="channel-id list file")
@click.option("--regions", default="", help="comma-separated region codes")
@click.option("--random-count", default=0, type=int)
@click.option("--fixture", type=click.Path(exists=True), help="replay fixture directory")
@click.option("--out", required=True, type=click.Path())
@click.option("--fanout", default=10, type=int)
@click.option("--depth", default=3, type=int)
@click.option("--cap", default=30, type=int, help="per-request result cap")
@click.option("--expand/--no-expand", default=True, help="snowball after seeding")
@click.option("--checkpoint", type=click.Path(), help="crawl checkpoint file")
@click.option("--rate", type=float, help="live request rate limit per second")
def collect(keywords, channels, regions, random_count, fixture, out, fanout, depth, cap, expand, checkpoint, rate):
    """Collect seed videos and snowball-expand through recommendations."""
    plan = CrawlPlan(
        keywords=_read_lines(keywords) if keywords else (),
        channels=_read_lines(channels) if channels else (),
        regions=[r for r in regions.split(",") if r],
        random_count=random_count,
        fanout=fanout,
        depth=depth,
        per_request_cap=cap,
    )
    if not plan.has_strategy:
        raise click.UsageError("configure at least one seed strategy")
    provider = _provider(fixture, rate)
    with workspace_lock(out):
        seeds, report = collect_seeds(plan, provider)
        dataset = snowball(seeds, plan, provider, checkpoint_path=checkpoint) if expand else seeds
        dataset.save(out)
        if report.failures:
            atomic_write_text(
                Path(out) / "collect.failures.tsv",
                "\n".join(f"{inp}\t{reason}" for inp, reason in report.failures) + "\n",
            )
        write_manifest(
            out,
            "collect",
            {"keywords": keywords, "channels": channels, "regions": regions,
             "fixture": fixture, "fanout": fanout, "depth": depth},
            None,
        )
    click.echo(f"collected {len(dataset)} videos, {len(dataset.edges)} edges "
               f"({len(report.failures)} failed inputs)")


@cli.command()
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--fixture", type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def audit(data, fixture, out):
    """Audit availability (removed/age-restricted) per ground-truth class."""
    dataset = _load_dataset(data)
    report = audit_availability(dataset, _provider(fixture))
    atomic_write_text(out, json.dumps(report.to_dict(), indent=2) + "\n")
    write_manifest(Path(out).parent, "audit", {"data": data, "fixture": fixture}, None)
    click.echo(f"audited {report.overall['count']} videos -> {out}")


@cli.command("annotate-serve")
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--log", "log_path", required=True, type=click.Path())
@click.option("--annotators", default="", help="comma-separated annotator ids")
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8400, type=int)
def annotate_serve(data, log_path, annotators, host, port):
    """Serve the annotation endpoints for the labeling UI."""
    from .annotation.server import serve
    from .annotation.store import AnnotationStore

    dataset = _load_dataset(data)
    store = AnnotationStore(
        dataset,
        annotators=[a for a in annotators.split(",") if a],
        log_path=log_path,
    )
    click.echo(f"serving {len(dataset)} videos on http://{host}:{port}")
    serve(store, host=host, port=port)


@cli.command()
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--log", "log_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def aggregate(data, log_path, out):
    """Aggregate votes to ground truth and report inter-rater agreement."""
    from .annotation.agreement import fleiss_kappa, rating_matrix
    from .annotation.store import AnnotationStore

    dataset = _load_dataset(data)
    store = AnnotationStore(dataset, log_path=log_path)
    entries, excluded = store.export_ground_truth()
    votes = {vid: store.votes_for(vid) for vid in dataset.records}
    matrix, _, skipped = rating_matrix(votes, raters_per_item=3)
    lines = [json.dumps(e.to_dict(), ensure_ascii=False) for e in entries]
    atomic_write_text(out, "\n".join(lines) + ("\n" if lines else ""))
    write_manifest(Path(out).parent, "aggregate", {"data": data, "log": log_path}, None)
    kappa = fleiss_kappa(matrix) if matrix.shape[0] else float("nan")
    click.echo(
        f"{len(entries)} ground-truth entries, {excluded} excluded, "
        f"{skipped} without 3 votes; fleiss kappa = {kappa:.3f}"
    )


@cli.command()
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--cache", type=click.Path(), help="thumbnail embedding cache directory")
def featurize(data, out, cache):
    """Extract feature bundles for every video in the dataset."""
    import numpy as np

    dataset = _load_dataset(data)
    records = list(dataset)
    extractor = _extractor_factory(cache)()
    bundles = extractor.fit_transform(records)
    out_path = Path(out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    tmp = out_path.with_name(out_path.name + ".tmp")
    with open(tmp, "wb") as f:
        np.savez_compressed(
            f,
            video_ids=np.array([b.video_id for b in bundles]),
            title_ids=np.stack([b.title_ids for b in bundles]),
            tag_ids=np.stack([b.tag_ids for b in bundles]),
            thumbnails=np.stack([b.thumbnail for b in bundles]),
            stats_style=np.stack([b.stats_style for b in bundles]),
            thumbnail_missing=np.array([b.thumbnail_missing for b in bundles]),
        )
    tmp.replace(out_path)
    write_manifest(out_path.parent, "featurize", {"data": data}, None)
    click.echo(f"featurized {len(bundles)} videos -> {out}")


def _labeled_training_data(dataset: Dataset, binary: bool):
    labeled = dataset.labeled_records()
    if not labeled:
        raise DataError("dataset has no usable ground truth")
    records = [r for r, _ in labeled]
    labels = [collapse_label(l) if binary else l for _, l in labeled]
    return records, labels


@cli.command()
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--binary/--multiclass", default=True)
@click.option("--epochs", default=50, type=int)
@click.option("--batch-size", default=32, type=int)
@click.option("--lr", default=1e-5, type=float)
@click.option("--seed", default=0, type=int, help="master rng seed")
@click.option("--cache", type=click.Path())
def train(data, out, binary, epochs, batch_size, lr, seed, cache):
    """Train the fusion classifier on the labeled dataset."""
    from .evaluation.harness import config_for
    from .model.estimator import FusionClassifier

    dataset = _load_dataset(data)
    records, labels = _labeled_training_data(dataset, binary)
    sub_seed = stage_seed(seed, "train")
    extractor = _extractor_factory(cache)()
    extractor.fit(records)
    bundles = extractor.transform(records)
    config = config_for(extractor, n_classes=2 if binary else 4)
    hyper = TrainHyperparams(
        learning_rate=lr, epochs=epochs, batch_size=batch_size, rng_seed=sub_seed
    )
    clf = FusionClassifier(config, hyper).fit(bundles, labels)
    TrainedPipeline(extractor, clf).save(out)
    write_manifest(
        Path(out).parent, "train",
        {"data": data, "binary": binary, "epochs": epochs, "lr": lr}, sub_seed,
    )
    click.echo(f"trained on {len(records)} videos, final loss "
               f"{clf.loss_history_[-1]:.4f} -> {out}")


@cli.command()
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--folds", default=5, type=int)
@click.option("--binary/--multiclass", default=True)
@click.option("--baselines", default="", help="comma-separated baseline names, or 'all'")
@click.option("--epochs", default=50, type=int)
@click.option("--lr", default=1e-5, type=float)
@click.option("--seed", default=0, type=int)
def evaluate(data, out, folds, binary, baselines, epochs, lr, seed):
    """Cross-validated evaluation of the fusion model and baselines."""
    from .evaluation.baselines import BASELINE_NAMES, BaselineSpec, run_baseline
    from .evaluation.folds import stratified_kfold
    from .evaluation.harness import run_fusion_cv
    from .evaluation.metrics import report_table

    dataset = _load_dataset(data)
    records, labels = _labeled_training_data(dataset, binary)
    sub_seed = stage_seed(seed, "evaluate")
    try:
        plan = stratified_kfold(labels, k=folds, seed=sub_seed)
    except ValueError as exc:
        raise DataError(str(exc))
    hyper = TrainHyperparams(learning_rate=lr, epochs=epochs, rng_seed=sub_seed)
    factory = _extractor_factory()
    reports = []
    names = BASELINE_NAMES if baselines == "all" else [b for b in baselines.split(",") if b]
    for name in names:
        reports.append(
            run_baseline(BaselineSpec(name), records, labels, plan, factory, hyper)
        )
    reports.append(
        run_fusion_cv(records, labels, plan, factory, hyperparams=hyper, name="fusion")
    )
    atomic_write_text(out, report_table(reports))
    write_manifest(
        Path(out).parent, "evaluate",
        {"data": data, "folds": folds, "binary": binary, "baselines": baselines},
        sub_seed,
    )
    click.echo(f"evaluated {len(reports)} models -> {out}")


@cli.command()
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--folds", default=5, type=int)
@click.option("--binary/--multiclass", default=True)
@click.option("--epochs", default=50, type=int)
@click.option("--lr", default=1e-5, type=float)
@click.option("--seed", default=0, type=int)
def ablate(data, out, folds, binary, epochs, lr, seed):
    """Train every non-empty branch subset (15 rows)."""
    from .evaluation.folds import stratified_kfold
    from .evaluation.harness import ablate as run_ablation
    from .evaluation.harness import ablation_table

    dataset = _load_dataset(data)
    records, labels = _labeled_training_data(dataset, binary)
    sub_seed = stage_seed(seed, "ablate")
    try:
        plan = stratified_kfold(labels, k=folds, seed=sub_seed)
    except ValueError as exc:
        raise DataError(str(exc))
    hyper = TrainHyperparams(learning_rate=lr, epochs=epochs, rng_seed=sub_seed)
    rows = run_ablation(records, labels, plan, _extractor_factory(), hyper)
    atomic_write_text(out, ablation_table(rows))
    write_manifest(Path(out).parent, "ablate", {"data": data, "folds": folds}, sub_seed)
    click.echo(f"{len(rows)} ablation rows -> {out}")


@cli.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--cache", type=click.Path())
def classify(model_path, data, out, cache):
    """Label every video in the dataset with the trained model."""
    from .features.thumbnail import EmbeddingCache, HashEmbeddingProvider

    dataset = _load_dataset(data)
    try:
        pipeline = TrainedPipeline.load(
            model_path,
            embedding_provider=HashEmbeddingProvider(),
            embedding_cache=EmbeddingCache(cache) if cache else None,
        )
    except ModelFormatError as exc:
        raise DataError(str(exc))
    lines = []
    skipped = []
    usable = []
    for record in dataset:
        violations = validate_record(record)
        if violations:
            skipped.append((record.video_id, "; ".join(violations)))
        else:
            usable.append(record)
    if usable:
        proba = pipeline.predict_proba_records(usable)
        classes = pipeline.classes_
        for record, p in zip(usable, proba):
            i = int(p.argmax())
            label = getattr(classes[i], "value", classes[i])
            lines.append(f"{record.video_id}\t{label}\t{p[i]:.6f}")
    atomic_write_text(out, "\n".join(lines) + ("\n" if lines else ""))
    if skipped:
        atomic_write_text(
            Path(out).with_suffix(".skipped.tsv"),
            "\n".join(f"{vid}\t{why}" for vid, why in skipped) + "\n",
        )
    write_manifest(Path(out).parent, "classify", {"model": model_path, "data": data}, None)
    click.echo(f"classified {len(lines)} videos ({len(skipped)} skipped) -> {out}")


@cli.command("graph-report")
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--labels", "labels_path", required=True, type=click.Path(exists=True))
@click.option("--out-prefix", required=True, type=click.Path())
@click.option("--self-loops/--no-self-loops", default=True)
def graph_report(data, labels_path, out_prefix, self_loops):
    """Prevalence and transition tables for the labeled graph."""
    from .graph import (
        build_graph,
        prevalence_by_strategy,
        prevalence_tsv,
        transitions,
        transitions_tsv,
    )

    dataset = _load_dataset(data)
    labels = _load_label_file(labels_path)
    graph = build_graph(dataset, labels)
    matrix = transitions(graph, include_self_loops=self_loops)
    atomic_write_text(out_prefix + ".transitions.tsv", transitions_tsv(matrix))
    atomic_write_text(
        out_prefix + ".prevalence.tsv",
        prevalence_tsv(prevalence_by_strategy(dataset, labels)),
    )
    if graph.quarantined or graph.degree_violations:
        atomic_write_text(
            out_prefix + ".quarantine.tsv",
            f"quarantined_edges\t{len(graph.quarantined)}\n"
            + "".join(f"degree_violation\t{v}\n" for v in graph.degree_violations),
        )
    write_manifest(
        Path(out_prefix).parent, "graph-report", {"data": data, "labels": labels_path}, None
    )
    click.echo(
        f"{matrix.total} labeled transitions, {len(graph.quarantined)} quarantined edges"
    )


@cli.command()
@click.option("--keywords", required=True, type=click.Path(exists=True))
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--fixture", type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--walks", default=100, type=int)
@click.option("--hops", default=10, type=int)
@click.option("--seed", default=0, type=int)
@click.option("--sanitize", is_flag=True, help="strip dictionary words from keywords")
@click.option("--avoid-revisits", is_flag=True)
def walk(keywords, model_path, fixture, out, walks, hops, seed, sanitize, avoid_revisits):
    """Run the random-toddler walk campaign."""
    from .features.style import default_bad_words
    from .features.thumbnail import HashEmbeddingProvider
    from .walker import model_classifier, run_campaign, sanitize_keywords

    keyword_list = _read_lines(keywords)
    if sanitize:
        keyword_list, dropped = sanitize_keywords(keyword_list, default_bad_words())
        if dropped:
            click.echo(f"dropped {len(dropped)} fully-inappropriate keywords")
    try:
        pipeline = TrainedPipeline.load(model_path, embedding_provider=HashEmbeddingProvider())
    except ModelFormatError as exc:
        raise DataError(str(exc))
    sub_seed = stage_seed(seed, "walk")
    traces = run_campaign(
        keyword_list, walks, hops, _provider(fixture),
        model_classifier(pipeline), master_seed=sub_seed,
        avoid_revisits=avoid_revisits, trace_log=out,
    )
    write_manifest(
        Path(out).parent, "walk",
        {"keywords": keywords, "model": model_path, "walks": walks, "hops": hops},
        sub_seed,
    )
    click.echo(f"{len(traces)} walk traces -> {out}")


@cli.command("walk-report")
@click.option("--traces", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--by", type=click.Choice(["keyword", "cluster"]), default="keyword")
@click.option("--clusters", "n_clusters", default=5, type=int)
@click.option("--cluster-names", type=click.Path(exists=True))
@click.option("--hops", default=10, type=int)
@click.option("--seed", default=0, type=int)
def walk_report(traces, out, by, n_clusters, cluster_names, hops, seed):
    """Cumulative per-hop inappropriate-hit table from walk traces."""
    from .walker import (
        WalkTrace,
        cluster_grouping,
        cluster_keywords,
        hop_report,
        hop_report_tsv,
        load_cluster_names,
    )

    trace_objs = [
        WalkTrace.from_dict(json.loads(line)) for line in _read_lines(traces)
    ]
    if not trace_objs:
        raise DataError(f"no traces in {traces}")
    grouping = None
    if by == "cluster":
        keywords = sorted({t.keyword for t in trace_objs})
        names = load_cluster_names(cluster_names) if cluster_names else None
        clusters = cluster_keywords(
            keywords, k=min(n_clusters, len(keywords)),
            seed=stage_seed(seed, "walk-report"), names=names,
        )
        grouping = cluster_grouping(clusters)
    report = hop_report(trace_objs, grouping=grouping, hops=hops)
    atomic_write_text(out, hop_report_tsv(report))
    write_manifest(Path(out).parent, "walk-report", {"traces": traces, "by": by}, None)
    click.echo(f"{len(report)} groups -> {out}")


def main(argv=None) -> None:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.UsageError as exc:
        exc.show()
        sys.exit(1)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except click.Abort:
        sys.exit(1)
    except ProviderError as exc:
        click.echo(f"provider error: {exc}", err=True)
        sys.exit(3)
    except (DataError, ModelFormatError) as exc:
        click.echo(f"data error: {exc}", err=True)
        sys.exit(2)
    sys.exit(0)


if __name__ == "__main__":
    main()
