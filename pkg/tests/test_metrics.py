import random

import pytest

from gtdetect import ToolkitError
from gtdetect.corpus import Document
from gtdetect.metrics import ConfusionCounts, accuracy, evaluate, f1, tally


class TestAccuracy:
    def test_perfect(self):
        assert accuracy(ConfusionCounts(tp=2, tn=2)) == 1.0

    def test_half(self):
        assert accuracy(ConfusionCounts(tp=1, fp=1, tn=1, fn=1)) == 0.5

    def test_empty_is_error(self):
        with pytest.raises(ToolkitError, match="no scored documents"):
            accuracy(ConfusionCounts())


class TestF1:
    def test_perfect(self):
        assert f1(ConfusionCounts(tp=3, tn=3)) == 1.0

    def test_derived_two_thirds(self):
        # precision 0.5, recall 1.0 -> harmonic mean 2/3
        assert f1(ConfusionCounts(tp=1, fp=1)) == pytest.approx(2.0 / 3.0, abs=1e-15)

    def test_degenerate_zero(self):
        assert f1(ConfusionCounts(tn=4)) == 0.0
        assert f1(ConfusionCounts(tn=2, fp=1, fn=1)) == 0.0


def test_recount_oracle_on_random_predictions():
    rnd = random.Random(0)
    for _ in range(1000):
        pairs = [
            (rnd.choice(["human", "machine"]), rnd.choice(["human", "machine"]))
            for _ in range(rnd.randrange(1, 30))
        ]
        c = tally(pairs)
        n_correct = sum(1 for t, p in pairs if t == p)
        assert accuracy(c) == pytest.approx(n_correct / len(pairs), abs=1e-15)
        tp = sum(1 for t, p in pairs if t == "machine" and p == "machine")
        fp = sum(1 for t, p in pairs if t == "human" and p == "machine")
        fn = sum(1 for t, p in pairs if t == "machine" and p == "human")
        expected_f1 = 2 * tp / (2 * tp + fp + fn) if (2 * tp + fp + fn) else 0.0
        assert f1(c) == pytest.approx(expected_f1, abs=1e-15)
        assert c.total == len(pairs)


class StubModel:
    def __init__(self, prob_fn):
        self.prob_fn = prob_fn

    def predict_proba(self, v):
        return self.prob_fn(v)


class TestEvaluate:
    def docs(self):
        return [
            Document(id="m0", text="x", label="machine"),
            Document(id="m1", text="x", label="machine"),
            Document(id="h0", text="x", label="human"),
            Document(id="h1", text="x", label="human"),
        ]

    def feats(self):
        return {d.id: [0.0] for d in self.docs()}

    def test_constant_machine_model(self):
        counts, per_doc = evaluate(StubModel(lambda v: 0.9), self.docs(), self.feats())
        assert accuracy(counts) == 0.5
        assert counts.tp == 2 and counts.fn == 0  # recall 1.0
        assert all(r["predicted"] == "machine" for r in per_doc)

    def test_empty_docs_error(self):
        with pytest.raises(ToolkitError, match="no documents"):
            evaluate(StubModel(lambda v: 0.5), [], {})

    def test_missing_feature_row_names_doc(self):
        feats = self.feats()
        del feats["h1"]
        with pytest.raises(ToolkitError, match="h1"):
            evaluate(StubModel(lambda v: 0.5), self.docs(), feats)

    def test_unlabeled_doc_rejected(self):
        docs = self.docs() + [Document(id="u", text="x")]
        feats = {d.id: [0.0] for d in docs}
        with pytest.raises(ToolkitError, match="unlabeled"):
            evaluate(StubModel(lambda v: 0.5), docs, feats)

    def test_idempotent(self):
        model = StubModel(lambda v: 0.42)
        first = evaluate(model, self.docs(), self.feats())
        second = evaluate(model, self.docs(), self.feats())
        assert first == second

    def test_threshold_at_half_is_machine(self):
        counts, per_doc = evaluate(StubModel(lambda v: 0.5), self.docs(), self.feats())
        assert all(r["predicted"] == "machine" for r in per_doc)
