import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_record
from vidguard.core import BinaryLabel, Dataset, Edge
from vidguard.graph import (
    MAX_OUT_DEGREE,
    TransitionMatrix,
    build_graph,
    prevalence,
    prevalence_by_strategy,
    prevalence_tsv,
    transitions,
    transitions_tsv,
)

A = BinaryLabel.APPROPRIATE
I = BinaryLabel.INAPPROPRIATE


def dataset_with_edges(edges, records=()):
    return Dataset(
        records=[make_record(v) for v in records],
        edges=[Edge(a, b, 1) for a, b in edges],
    )


def transition_oracle(edges, labels, include_self_loops=True):
    """Exhaustive enumeration: classify each labeled edge into one cell."""
    cells = {"aa": 0, "ai": 0, "ia": 0, "ii": 0}
    for a, b in set(edges):
        if a not in labels or b not in labels:
            continue
        if not include_self_loops and a == b:
            continue
        key = ("a" if labels[a] == A else "i") + ("a" if labels[b] == A else "i")
        cells[key] += 1
    return cells


class TestBuildGraph:
    def test_dedupes_and_quarantines(self):
        ds = dataset_with_edges([("x", "y"), ("x", "y"), ("x", "z")])
        graph = build_graph(ds, {"x": A, "y": I})
        assert graph.edges == [("x", "y")]
        assert graph.quarantined == [("x", "z")]
        assert graph.n_edges == 1

    def test_degree_violation_flagged(self):
        edges = [("hub", f"t{i}") for i in range(MAX_OUT_DEGREE + 1)]
        labels = {"hub": A, **{f"t{i}": A for i in range(MAX_OUT_DEGREE + 1)}}
        graph = build_graph(dataset_with_edges(edges), labels)
        assert graph.degree_violations == ["hub"]

    def test_at_limit_not_flagged(self):
        edges = [("hub", f"t{i}") for i in range(MAX_OUT_DEGREE)]
        graph = build_graph(dataset_with_edges(edges), {})
        assert graph.degree_violations == []

    def test_labels_restricted_to_graph_nodes(self):
        ds = dataset_with_edges([("x", "y")], records=["x", "y"])
        graph = build_graph(ds, {"x": A, "y": I, "elsewhere": A})
        assert set(graph.labels) == {"x", "y"}
        assert graph.n_nodes == 2


class TestTransitions:
    def test_example_counts(self):
        edges = [("a1", "a2"), ("a1", "i1"), ("i1", "a1"), ("i1", "i2"), ("i2", "i1")]
        labels = {"a1": A, "a2": A, "i1": I, "i2": I}
        m = transitions(build_graph(dataset_with_edges(edges), labels))
        assert (m.aa, m.ai, m.ia, m.ii) == (1, 1, 1, 2)
        assert m.total == 5

    def test_self_loop_toggle(self):
        edges = [("a1", "a1"), ("a1", "i1")]
        labels = {"a1": A, "i1": I}
        graph = build_graph(dataset_with_edges(edges), labels)
        assert transitions(graph).aa == 1
        assert transitions(graph, include_self_loops=False).aa == 0

    def test_row_fractions(self):
        m = TransitionMatrix(aa=3, ai=1, ia=0, ii=0)
        rows = m.row_fractions()
        assert rows["appropriate"]["appropriate"] == 0.75
        assert rows["appropriate"]["inappropriate"] == 0.25
        # empty source row reports zeros rather than dividing by zero
        assert rows["inappropriate"] == {"appropriate": 0.0, "inappropriate": 0.0}

    def test_matches_oracle_on_random_graphs(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            n = int(rng.integers(2, 31))
            node_ids = [f"n{i}" for i in range(n)]
            labels = {v: (A if rng.random() < 0.5 else I) for v in node_ids}
            # some nodes unlabeled -> their edges must be quarantined
            for v in node_ids:
                if rng.random() < 0.2:
                    del labels[v]
            n_edges = int(rng.integers(0, 3 * n))
            edges = [
                (node_ids[rng.integers(n)], node_ids[rng.integers(n)])
                for _ in range(n_edges)
            ]
            graph = build_graph(dataset_with_edges(edges), labels)
            m = transitions(graph)
            oracle = transition_oracle(edges, labels)
            assert (m.aa, m.ai, m.ia, m.ii) == (
                oracle["aa"], oracle["ai"], oracle["ia"], oracle["ii"],
            )
            assert m.total == len(graph.edges)

    @given(st.permutations(["a1", "a2", "i1", "i2"]))
    def test_edge_insertion_order_irrelevant(self, order):
        labels = {"a1": A, "a2": A, "i1": I, "i2": I}
        edges = [(x, y) for x in order for y in order if x != y]
        m = transitions(build_graph(dataset_with_edges(edges), labels))
        assert (m.aa, m.ai, m.ia, m.ii) == (2, 4, 4, 2)


class TestPrevalence:
    def test_overall_and_subsets(self):
        labels = {"a": A, "b": A, "c": I, "d": I}
        report = prevalence(labels, subsets={"pair": ["a", "c"], "missing": ["zz"]})
        assert report["overall"]["total"] == 4
        assert report["overall"]["inappropriate_fraction"] == 0.5
        assert report["pair"] == {
            "total": 2,
            "appropriate": 1,
            "inappropriate": 1,
            "appropriate_fraction": 0.5,
            "inappropriate_fraction": 0.5,
        }
        assert report["missing"]["total"] == 0
        assert report["missing"]["appropriate_fraction"] == 0.0

    def test_by_strategy(self):
        ds = Dataset(
            records=[
                make_record("a", seed_strategy="keyword"),
                make_record("b", seed_strategy="keyword"),
                make_record("c"),
            ]
        )
        report = prevalence_by_strategy(ds, {"a": A, "b": I, "c": I})
        assert report["keyword"]["total"] == 2
        assert report["untagged"]["inappropriate"] == 1

    def test_tsv_emitters(self):
        m = TransitionMatrix(1, 2, 3, 4)
        tsv = transitions_tsv(m)
        assert tsv.startswith("source\tdestination")
        assert "inappropriate\tinappropriate\t4\t0.400000" in tsv
        p_tsv = prevalence_tsv(prevalence({"a": A}))
        assert "overall\t1\t1\t0\t100.00\t0.00" in p_tsv
