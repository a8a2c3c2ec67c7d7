import numpy as np
import pytest
from fastapi.testclient import TestClient
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_record
from vidguard.annotation.agreement import (
    DegenerateAgreementError,
    fleiss_kappa,
    rating_matrix,
)
from vidguard.annotation.server import create_app
from vidguard.annotation.store import (
    LABEL_DEFINITIONS,
    AnnotationStore,
    InsufficientRatersError,
    UnknownAnnotatorError,
    aggregate,
)
from vidguard.core import EXCLUDED, AnnotationRecord, Dataset, Label


class TestAggregate:
    def test_unanimous(self):
        assert aggregate([Label.SUITABLE] * 3) == Label.SUITABLE

    def test_two_vs_one(self):
        assert (
            aggregate([Label.DISTURBING, Label.DISTURBING, Label.SUITABLE])
            == Label.DISTURBING
        )

    def test_three_way_split_excluded(self):
        assert (
            aggregate([Label.SUITABLE, Label.DISTURBING, Label.IRRELEVANT]) == EXCLUDED
        )

    def test_top_two_tie_excluded(self):
        votes = [Label.SUITABLE] * 2 + [Label.DISTURBING] * 2 + [Label.IRRELEVANT]
        assert aggregate(votes) == EXCLUDED

    def test_plurality_with_five_raters(self):
        votes = [Label.SUITABLE] * 3 + [Label.DISTURBING, Label.IRRELEVANT]
        assert aggregate(votes) == Label.SUITABLE

    def test_fewer_than_three_raises(self):
        with pytest.raises(InsufficientRatersError):
            aggregate([Label.SUITABLE, Label.SUITABLE])


def fleiss_direct(matrix):
    """Independent direct evaluation of the published formula, in pure
    Python, used as the oracle for the vectorized implementation."""
    big_n = len(matrix)
    n = sum(matrix[0])
    k = len(matrix[0])
    p_j = [sum(row[j] for row in matrix) / (big_n * n) for j in range(k)]
    p_i = [
        (sum(c * c for c in row) - n) / (n * (n - 1)) for row in matrix
    ]
    p_bar = sum(p_i) / big_n
    p_e = sum(p * p for p in p_j)
    return (p_bar - p_e) / (1 - p_e)


class TestFleissKappa:
    def test_unanimous_is_exactly_one(self):
        matrix = [[3, 0, 0, 0], [0, 3, 0, 0], [0, 0, 0, 3]]
        assert fleiss_kappa(matrix) == 1.0

    # [DERIVED] oracle values frozen from fleiss_direct above
    CRAFTED = [
        # mixed agreement over 4 categories, 3 raters
        [[3, 0, 0, 0], [0, 3, 0, 0], [1, 1, 1, 0], [2, 0, 1, 0], [0, 0, 3, 0]],
        # the original 1971-style example shape: 6 raters, 3 categories
        [[0, 0, 6], [1, 5, 0], [2, 2, 2], [3, 3, 0], [4, 1, 1]],
        # near-chance disagreement, 3 raters, 2 categories
        [[2, 1], [1, 2], [2, 1], [1, 2]],
    ]

    @pytest.mark.parametrize("matrix", CRAFTED)
    def test_matches_direct_formula(self, matrix):
        assert fleiss_kappa(matrix) == pytest.approx(fleiss_direct(matrix), abs=1e-9)

    def test_all_raters_one_category_every_item_is_degenerate_but_perfect(self):
        # P_e == 1 and P_bar == 1: perfect agreement short-circuits
        assert fleiss_kappa([[3, 0], [3, 0]]) == 1.0

    def test_inconstant_rater_count_rejected(self):
        with pytest.raises(ValueError):
            fleiss_kappa([[3, 0], [2, 0]])

    def test_single_rater_rejected(self):
        with pytest.raises(ValueError):
            fleiss_kappa([[1, 0], [0, 1]])

    def test_kappa_at_most_one(self):
        for matrix in self.CRAFTED:
            assert fleiss_kappa(matrix) <= 1.0

    _ROWS = [  # every way 3 raters can split over 3 categories
        (a, b, 3 - a - b) for a in range(4) for b in range(4 - a)
    ]

    @given(
        st.lists(st.sampled_from(_ROWS), min_size=2, max_size=8),
        st.permutations([0, 1, 2]),
    )
    def test_column_permutation_invariance(self, matrix, perm):
        permuted = [[row[p] for p in perm] for row in matrix]
        try:
            base = fleiss_kappa(matrix)
        except DegenerateAgreementError:
            with pytest.raises(DegenerateAgreementError):
                fleiss_kappa(permuted)
            return
        assert fleiss_kappa(permuted) == pytest.approx(base, abs=1e-12)


class TestRatingMatrix:
    def test_builds_counts_and_skips_wrong_rater_count(self):
        votes = {
            "a": [Label.SUITABLE, Label.SUITABLE, Label.DISTURBING],
            "b": [Label.SUITABLE],  # not enough votes
            "c": [Label.IRRELEVANT] * 3,
        }
        matrix, ids, skipped = rating_matrix(votes)
        assert skipped == 1
        assert ids == ["a", "c"]
        assert matrix.tolist() == [[2, 1, 0, 0], [0, 0, 0, 3]]

    def test_empty(self):
        matrix, ids, skipped = rating_matrix({})
        assert matrix.shape == (0, 4)
        assert ids == [] and skipped == 0


def _store(tmp_path=None, n_videos=3, annotators=("r1", "r2", "r3")):
    ds = Dataset(records=[make_record(f"v{i}") for i in range(n_videos)])
    log = str(tmp_path / "votes.jsonl") if tmp_path else None
    return AnnotationStore(ds, annotators=annotators, log_path=log)


class TestAnnotationStore:
    def test_submit_and_export_majority(self):
        store = _store()
        for rater, label in [
            ("r1", Label.SUITABLE),
            ("r2", Label.SUITABLE),
            ("r3", Label.DISTURBING),
        ]:
            store.submit(AnnotationRecord("v0", rater, label))
        entries, excluded = store.export_ground_truth()
        assert excluded == 0
        assert len(entries) == 1
        assert entries[0].final == Label.SUITABLE

    def test_export_counts_excluded(self):
        store = _store()
        for rater, label in [
            ("r1", Label.SUITABLE),
            ("r2", Label.DISTURBING),
            ("r3", Label.IRRELEVANT),
        ]:
            store.submit(AnnotationRecord("v0", rater, label))
        entries, excluded = store.export_ground_truth()
        assert entries == [] and excluded == 1

    def test_double_submit_overwrites_but_keeps_audit_trail(self):
        store = _store()
        store.submit(AnnotationRecord("v0", "r1", Label.SUITABLE))
        store.submit(AnnotationRecord("v0", "r1", Label.DISTURBING))
        assert store.votes_for("v0") == [Label.DISTURBING]
        assert store.progress()["events"] == 2

    def test_unknown_annotator_and_video(self):
        store = _store()
        with pytest.raises(UnknownAnnotatorError):
            store.submit(AnnotationRecord("v0", "stranger", Label.SUITABLE))
        with pytest.raises(KeyError):
            store.submit(AnnotationRecord("nope", "r1", Label.SUITABLE))

    def test_next_task_prefers_partially_voted_videos(self):
        store = _store()
        store.submit(AnnotationRecord("v2", "r1", Label.SUITABLE))
        task = store.next_task("r2")
        assert task.video_id == "v2"
        # the annotator who already voted gets a different video
        assert store.next_task("r1").video_id == "v0"

    def test_next_task_none_when_done(self):
        store = _store(n_videos=1)
        store.submit(AnnotationRecord("v0", "r1", Label.SUITABLE))
        assert store.next_task("r1") is None

    def test_task_payload_contents(self):
        store = _store()
        task = store.next_task("r1")
        assert task.playback_url.endswith(task.video_id)
        assert task.label_definitions == LABEL_DEFINITIONS

    def test_log_replay_restores_state(self, tmp_path):
        store = _store(tmp_path)
        for rater in ("r1", "r2", "r3"):
            store.submit(AnnotationRecord("v1", rater, Label.RESTRICTED))
        reloaded = AnnotationStore(store.dataset, log_path=tmp_path / "votes.jsonl")
        entries, _ = reloaded.export_ground_truth()
        assert entries[0].video_id == "v1"
        assert entries[0].final == Label.RESTRICTED

    def test_progress(self):
        store = _store()
        store.submit(AnnotationRecord("v0", "r1", Label.SUITABLE))
        p = store.progress()
        assert p["videos"] == 3
        assert p["votes_per_annotator"] == {"r1": 1}
        assert p["videos_with_3_votes"] == 0


class TestServer:
    @pytest.fixture
    def client(self):
        return TestClient(create_app(_store(annotators=())))

    def _register(self, client, who):
        assert client.post("/annotators", json={"annotator_id": who}).status_code == 201

    def test_full_loop_majority(self, client):
        for who in ("r1", "r2", "r3"):
            self._register(client, who)
        for who, label in (("r1", "suitable"), ("r2", "suitable"), ("r3", "disturbing")):
            task = client.get("/tasks/next", params={"annotator": who}).json()
            resp = client.post(
                "/annotations",
                json={"video_id": task["video_id"], "annotator_id": who, "label": label},
            )
            assert resp.status_code == 201
        export = client.get("/export")
        lines = [l for l in export.text.splitlines() if l]
        # all three raters were steered to the same (most-voted) video
        assert len(lines) == 1
        assert '"final": "suitable"' in lines[0]
        assert export.headers["X-Excluded-Count"] == "0"

    def test_task_queue_drains_to_204(self, client):
        self._register(client, "r1")
        seen = set()
        while True:
            resp = client.get("/tasks/next", params={"annotator": "r1"})
            if resp.status_code == 204:
                break
            vid = resp.json()["video_id"]
            assert vid not in seen
            seen.add(vid)
            client.post(
                "/annotations",
                json={"video_id": vid, "annotator_id": "r1", "label": "suitable"},
            )
        assert len(seen) == 3

    def test_unknown_annotator_404(self, client):
        assert (
            client.get("/tasks/next", params={"annotator": "ghost"}).status_code == 404
        )
        resp = client.post(
            "/annotations",
            json={"video_id": "v0", "annotator_id": "ghost", "label": "suitable"},
        )
        assert resp.status_code == 404

    def test_bad_label_422(self, client):
        self._register(client, "r1")
        resp = client.post(
            "/annotations",
            json={"video_id": "v0", "annotator_id": "r1", "label": "meh"},
        )
        assert resp.status_code == 422

    def test_progress_endpoint(self, client):
        self._register(client, "r1")
        body = client.get("/progress").json()
        assert body["videos"] == 3
        assert "r1" in body["annotators"]
