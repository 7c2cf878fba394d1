"""Classification metrics; machine-generated text is the positive class."""

from __future__ import annotations

from dataclasses import dataclass

from . import ToolkitError


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0  # machine predicted machine
    fp: int = 0  # human predicted machine
    tn: int = 0  # human predicted human
    fn: int = 0  # machine predicted human

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def to_dict(self):
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


def tally(pairs) -> ConfusionCounts:
    """Count (true_label, predicted_label) pairs."""
    tp = fp = tn = fn = 0
    for truth, pred in pairs:
        if truth == "machine":
            if pred == "machine":
                tp += 1
            else:
                fn += 1
        elif truth == "human":
            if pred == "machine":
                fp += 1
            else:
                tn += 1
        else:
            raise ToolkitError(f"unknown label {truth!r}")
    return ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn)


def accuracy(c: ConfusionCounts) -> float:
    if c.total == 0:
        raise ToolkitError("no scored documents")
    return (c.tp + c.tn) / c.total


def f1(c: ConfusionCounts) -> float:
    """2*tp / (2*tp + fp + fn); 0 when the denominator is 0."""
    if c.total == 0:
        raise ToolkitError("no scored documents")
    denom = 2 * c.tp + c.fp + c.fn
    return 2 * c.tp / denom if denom else 0.0


def evaluate(model, docs, features_by_id) -> tuple[ConfusionCounts, list[dict]]:
    """Score labeled docs at the 0.5 probability threshold.

    features_by_id maps doc id -> raw feature vector; a missing row is an
    error naming the document.
    """
    if not docs:
        raise ToolkitError("no documents to evaluate")
    per_doc = []
    pairs = []
    for doc in docs:
        if doc.label is None:
            raise ToolkitError(f"document {doc.id!r} is unlabeled")
        if doc.id not in features_by_id:
            raise ToolkitError(f"missing feature row for document {doc.id!r}")
        prob = model.predict_proba(features_by_id[doc.id])
        pred = "machine" if prob >= 0.5 else "human"
        pairs.append((doc.label, pred))
        per_doc.append({"id": doc.id, "label": doc.label, "predicted": pred, "prob_machine": prob})
    return tally(pairs), per_doc
