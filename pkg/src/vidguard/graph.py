"""Labeled recommendation digraph: prevalence and class transitions."""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .core import BinaryLabel, Dataset

MAX_OUT_DEGREE = 10  # the crawl collects at most 10 recommendations per video


@dataclass
class RecGraph:
    """Directed recommendation graph over binary-labeled nodes.

    Edges whose endpoints lack a label are quarantined (kept countable but
    excluded from transition analysis).
    """

    labels: dict[str, BinaryLabel]
    edges: list[tuple[str, str]]
    quarantined: list[tuple[str, str]] = field(default_factory=list)
    degree_violations: list[str] = field(default_factory=list)

    @property
    def n_nodes(self) -> int:
        return len(self.labels)

    @property
    def n_edges(self) -> int:
        return len(self.edges)


def build_graph(
    dataset: Dataset, labels: Mapping[str, BinaryLabel]
) -> RecGraph:
    """Deduplicate the dataset's edges and attach binary labels.

    Nodes with more than MAX_OUT_DEGREE out-edges are flagged as crawl
    invariant breaches; unlabeled-endpoint edges go to quarantine.
    """
    seen: set[tuple[str, str]] = set()
    edges: list[tuple[str, str]] = []
    quarantined: list[tuple[str, str]] = []
    out_degree: Counter = Counter()
    for edge in dataset.edges:
        key = (edge.from_id, edge.to_id)
        if key in seen:
            continue
        seen.add(key)
        out_degree[edge.from_id] += 1
        if edge.from_id in labels and edge.to_id in labels:
            edges.append(key)
        else:
            quarantined.append(key)
    violations = sorted(v for v, d in out_degree.items() if d > MAX_OUT_DEGREE)
    nodes = set(dataset.records)
    for from_id, to_id in seen:
        nodes.add(from_id)
        nodes.add(to_id)
    node_labels = {vid: labels[vid] for vid in nodes if vid in labels}
    return RecGraph(
        labels=node_labels,
        edges=edges,
        quarantined=quarantined,
        degree_violations=violations,
    )


@dataclass(frozen=True)
class TransitionMatrix:
    """2x2 labeled-edge counts; cell sum equals the labeled-edge count."""

    aa: int
    ai: int
    ia: int
    ii: int

    @property
    def total(self) -> int:
        return self.aa + self.ai + self.ia + self.ii

    def row_fractions(self) -> dict[str, dict[str, float]]:
        out = {}
        for src, cells in (
            ("appropriate", (self.aa, self.ai)),
            ("inappropriate", (self.ia, self.ii)),
        ):
            total = sum(cells)
            out[src] = {
                "appropriate": cells[0] / total if total else 0.0,
                "inappropriate": cells[1] / total if total else 0.0,
            }
        return out


def transitions(graph: RecGraph, include_self_loops: bool = True) -> TransitionMatrix:
    """Count each labeled edge in exactly one cell of the 2x2 matrix."""
    cells = Counter()
    for from_id, to_id in graph.edges:
        if not include_self_loops and from_id == to_id:
            continue
        src = graph.labels[from_id] == BinaryLabel.APPROPRIATE
        dst = graph.labels[to_id] == BinaryLabel.APPROPRIATE
        cells[(src, dst)] += 1
    return TransitionMatrix(
        aa=cells[(True, True)],
        ai=cells[(True, False)],
        ia=cells[(False, True)],
        ii=cells[(False, False)],
    )


def prevalence(
    labels: Mapping[str, BinaryLabel],
    subsets: Optional[Mapping[str, Sequence[str]]] = None,
) -> dict[str, dict]:
    """Counts and fractions per binary label, overall and per subset."""

    def summarize(ids) -> dict:
        counts = Counter(labels[v] for v in ids if v in labels)
        total = sum(counts.values())
        return {
            "total": total,
            "appropriate": counts[BinaryLabel.APPROPRIATE],
            "inappropriate": counts[BinaryLabel.INAPPROPRIATE],
            "appropriate_fraction": counts[BinaryLabel.APPROPRIATE] / total if total else 0.0,
            "inappropriate_fraction": counts[BinaryLabel.INAPPROPRIATE] / total if total else 0.0,
        }

    out = {"overall": summarize(labels.keys())}
    for name, ids in (subsets or {}).items():
        out[name] = summarize(ids)
    return out


def prevalence_by_strategy(dataset: Dataset, labels: Mapping[str, BinaryLabel]) -> dict:
    """Prevalence grouped by the records' seed strategy tag."""
    groups: dict[str, list[str]] = defaultdict(list)
    for vid, record in dataset.records.items():
        groups[record.seed_strategy or "untagged"].append(vid)
    return prevalence(labels, groups)


def transitions_tsv(matrix: TransitionMatrix) -> str:
    lines = ["source\tdestination\tcount\tfraction"]
    total = matrix.total or 1
    for name, count in (
        ("appropriate\tappropriate", matrix.aa),
        ("appropriate\tinappropriate", matrix.ai),
        ("inappropriate\tappropriate", matrix.ia),
        ("inappropriate\tinappropriate", matrix.ii),
    ):
        lines.append(f"{name}\t{count}\t{count / total:.6f}")
    return "\n".join(lines) + "\n"


def prevalence_tsv(report: dict) -> str:
    lines = ["subset\ttotal\tappropriate\tinappropriate\tappropriate_%\tinappropriate_%"]
    for name, row in report.items():
        lines.append(
            f"{name}\t{row['total']}\t{row['appropriate']}\t{row['inappropriate']}\t"
            f"{row['appropriate_fraction'] * 100:.2f}\t{row['inappropriate_fraction'] * 100:.2f}"
        )
    return "\n".join(lines) + "\n"
