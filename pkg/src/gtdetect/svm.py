"""Linear SVM with dual coordinate descent, Platt calibration, and C search.

Training solves the L2-regularized hinge-loss SVM in the dual: minimize
0.5*a'Qa - e'a subject to 0 <= a_i <= C, with Q_ij = y_i y_j x_i.x_j over
bias-augmented inputs.  One dual variable is optimized at a time in a seeded
random order per epoch; the per-coordinate minimizer is closed-form.  The
loop stops when the largest projected-gradient violation in an epoch falls
under tol, or after max_epochs.

The positive class (+1) is machine-generated text, the negative (-1) human.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import MODEL_FORMAT_VERSION, ToolkitError
from .featurestore import Standardizer, fit_standardizer, transform
from .rng import Xorshift64Star

CLASS_MAP = {"+1": "machine", "-1": "human"}
DEFAULT_GRID = (1.0, 10.0, 100.0, 1000.0)


def labels_to_signs(labels) -> np.ndarray:
    signs = []
    for lab in labels:
        if lab == "machine":
            signs.append(1.0)
        elif lab == "human":
            signs.append(-1.0)
        else:
            raise ToolkitError(f"unlabeled or unknown-label document ({lab!r})")
    return np.asarray(signs)


@dataclass
class TrainResult:
    w: np.ndarray
    b: float
    alpha: np.ndarray
    epochs: int
    converged: bool
    objectives: list[float] = field(default_factory=list)  # dual objective per epoch

    def dual_objective(self) -> float:
        return self.objectives[-1]


def train(
    X: np.ndarray,
    y: np.ndarray,
    C: float,
    seed: int = 0,
    tol: float = 1e-3,
    max_epochs: int = 1000,
) -> TrainResult:
    """Fit (w, b) on standardized features X with labels y in {+1, -1}."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = X.shape[0]
    if n < 2 or n != y.shape[0]:
        raise ToolkitError("training requires at least 2 labeled vectors")
    if not (np.any(y > 0) and np.any(y < 0)):
        raise ToolkitError("training requires both classes")
    if C <= 0:
        raise ToolkitError("C must be positive")

    # Bias via an augmented constant feature.
    Xa = np.hstack([X, np.ones((n, 1))])
    q_diag = np.einsum("ij,ij->i", Xa, Xa)
    alpha = np.zeros(n)
    w = np.zeros(Xa.shape[1])
    rng = Xorshift64Star(seed)

    objectives = []
    converged = False
    epoch = 0
    for epoch in range(1, max_epochs + 1):
        max_violation = 0.0
        for i in rng.permutation(n):
            g = y[i] * float(w @ Xa[i]) - 1.0
            a = alpha[i]
            if a <= 0.0:
                pg = min(g, 0.0)
            elif a >= C:
                pg = max(g, 0.0)
            else:
                pg = g
            if pg != 0.0:
                max_violation = max(max_violation, abs(pg))
                new_a = min(max(a - g / q_diag[i], 0.0), C)
                if new_a != a:
                    alpha[i] = new_a
                    w += (new_a - a) * y[i] * Xa[i]
        objectives.append(0.5 * float(w @ w) - float(alpha.sum()))
        if max_violation < tol:
            converged = True
            break

    return TrainResult(
        w=w[:-1].copy(),
        b=float(w[-1]),
        alpha=alpha,
        epochs=epoch,
        converged=converged,
        objectives=objectives,
    )


def fit_platt(decision_values, y, max_iter: int = 100) -> tuple[float, float]:
    """Sigmoid calibration p = 1/(1 + exp(A*f + B)) by penalized maximum likelihood.

    Targets are smoothed per Platt: t+ = (N+ + 1)/(N+ + 2), t- = 1/(N- + 2).
    Newton's method with backtracking line search, at most max_iter steps.
    """
    f = np.asarray(decision_values, dtype=np.float64)
    y = np.asarray(y)
    prior1 = int(np.sum(y > 0))
    prior0 = len(y) - prior1
    hi = (prior1 + 1.0) / (prior1 + 2.0)
    lo = 1.0 / (prior0 + 2.0)
    t = np.where(y > 0, hi, lo)

    def objective(a, b):
        z = a * f + b
        return float(np.sum(np.where(z >= 0, t * z, (t - 1.0) * z) + np.log1p(np.exp(-np.abs(z)))))

    a, b = 0.0, math.log((prior0 + 1.0) / (prior1 + 1.0))
    fval = objective(a, b)
    min_step, sigma, eps = 1e-10, 1e-12, 1e-5
    for _ in range(max_iter):
        z = a * f + b
        p = np.where(z >= 0, np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z))), 1.0 / (1.0 + np.exp(-np.abs(z))))
        q = 1.0 - p
        d1 = t - p
        d2 = p * q
        h11 = float(np.sum(f * f * d2)) + sigma
        h22 = float(np.sum(d2)) + sigma
        h21 = float(np.sum(f * d2))
        g1 = float(np.sum(f * d1))
        g2 = float(np.sum(d1))
        if abs(g1) < eps and abs(g2) < eps:
            break
        det = h11 * h22 - h21 * h21
        da = -(h22 * g1 - h21 * g2) / det
        db = -(-h21 * g1 + h11 * g2) / det
        gd = g1 * da + g2 * db
        step = 1.0
        while step >= min_step:
            new_a, new_b = a + step * da, b + step * db
            new_f = objective(new_a, new_b)
            if new_f < fval + 1e-4 * step * gd:
                a, b, fval = new_a, new_b, new_f
                break
            step /= 2.0
        else:
            break  # line search failed; current point is good enough
    return a, b


def _sigmoid_platt(f: float, a: float, b: float) -> float:
    z = a * f + b
    if z >= 0:
        e = math.exp(-z)
        return e / (1.0 + e)
    return 1.0 / (1.0 + math.exp(z))


@dataclass
class LinearModel:
    """Trained SVM: weights over standardized features plus Platt calibration."""

    schema_id: str
    feature_names: tuple[str, ...]
    w: np.ndarray
    b: float
    platt_a: float
    platt_b: float
    standardizer: Standardizer
    c_selected: float
    seed: int
    cv_accuracy: dict = field(default_factory=dict)  # str(C) -> mean fold accuracy
    format_version: int = MODEL_FORMAT_VERSION
    class_map: dict = field(default_factory=lambda: dict(CLASS_MAP))

    def decision_value(self, v_raw) -> float:
        x = transform(self.standardizer, v_raw)
        return float(self.w @ x + self.b)

    def predict_proba(self, v_raw) -> float:
        """Probability that the document is machine-generated."""
        return _sigmoid_platt(self.decision_value(v_raw), self.platt_a, self.platt_b)

    def predict(self, v_raw) -> str:
        """machine iff p >= 0.5 (ties go to the positive class)."""
        return "machine" if self.predict_proba(v_raw) >= 0.5 else "human"

    def feature_weights(self) -> list[tuple[str, float]]:
        return list(zip(self.feature_names, (float(v) for v in self.w)))

    def feature_weights_by_magnitude(self) -> list[tuple[str, float]]:
        return sorted(self.feature_weights(), key=lambda kv: (-abs(kv[1]), kv[0]))

    def to_json(self) -> str:
        doc = {
            "format_version": self.format_version,
            "schema_id": self.schema_id,
            "feature_names": list(self.feature_names),
            "w": [float(v) for v in self.w],
            "b": self.b,
            "platt_a": self.platt_a,
            "platt_b": self.platt_b,
            "standardizer": {
                "means": [float(v) for v in self.standardizer.means],
                "stds": [float(v) for v in self.standardizer.stds],
            },
            "c_selected": self.c_selected,
            "seed": self.seed,
            "cv_accuracy": self.cv_accuracy,
            "class_map": self.class_map,
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path: str) -> "LinearModel":
        try:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise ToolkitError(f"cannot load model {path}: {e}") from e
        if doc.get("format_version") != MODEL_FORMAT_VERSION:
            raise ToolkitError(f"{path}: unsupported model format version")
        std = Standardizer(
            means=np.asarray(doc["standardizer"]["means"], dtype=np.float64),
            stds=np.asarray(doc["standardizer"]["stds"], dtype=np.float64),
            schema_id=doc["schema_id"],
        )
        model = cls(
            schema_id=doc["schema_id"],
            feature_names=tuple(doc["feature_names"]),
            w=np.asarray(doc["w"], dtype=np.float64),
            b=float(doc["b"]),
            platt_a=float(doc["platt_a"]),
            platt_b=float(doc["platt_b"]),
            standardizer=std,
            c_selected=float(doc["c_selected"]),
            seed=int(doc.get("seed", 0)),
            cv_accuracy=doc.get("cv_accuracy", {}),
            class_map=doc.get("class_map", dict(CLASS_MAP)),
        )
        if len(model.w) != len(model.feature_names):
            raise ToolkitError(f"{path}: weight/feature count mismatch")
        return model


def _stratified_folds(y: np.ndarray, folds: int, rng: Xorshift64Star) -> np.ndarray:
    """Fold index per sample; each class spread round-robin after a seeded shuffle."""
    assignment = np.zeros(len(y), dtype=int)
    for sign in (1.0, -1.0):
        idx = [i for i in range(len(y)) if y[i] == sign]
        rng.shuffle(idx)
        for pos, i in enumerate(idx):
            assignment[i] = pos % folds
    return assignment


def grid_search(
    X_raw: np.ndarray,
    labels,
    schema_id: str,
    feature_names,
    grid=DEFAULT_GRID,
    folds: int = 5,
    seed: int = 0,
) -> LinearModel:
    """Select C by stratified k-fold CV accuracy, refit on all data, calibrate.

    Ties in mean CV accuracy go to the smallest C.  The standardizer is fit
    once on the full training set and stored in the model; CV fold accuracy
    uses the uncalibrated decision sign (0 counts as machine).
    """
    X_raw = np.asarray(X_raw, dtype=np.float64)
    y = labels_to_signs(labels)
    grid = sorted(float(c) for c in grid)
    if not grid:
        raise ToolkitError("empty C grid")
    if folds < 2:
        raise ToolkitError("folds must be >= 2")

    std = fit_standardizer(X_raw, schema_id)
    Xs = transform(std, X_raw)

    cv_accuracy: dict[str, float] = {}
    if len(grid) == 1:
        best_c = grid[0]
    else:
        fold_of = _stratified_folds(y, folds, Xorshift64Star(seed))
        best_c, best_acc = None, -1.0
        for C in grid:
            accs = []
            for f in range(folds):
                tr = fold_of != f
                te = fold_of == f
                if not te.any():
                    continue
                res = train(Xs[tr], y[tr], C, seed=seed)
                margin = Xs[te] @ res.w + res.b
                pred = np.where(margin >= 0, 1.0, -1.0)
                accs.append(float(np.mean(pred == y[te])))
            mean_acc = sum(accs) / len(accs)
            cv_accuracy[repr(C)] = mean_acc
            if mean_acc > best_acc:
                best_acc, best_c = mean_acc, C

    final = train(Xs, y, best_c, seed=seed)
    decisions = Xs @ final.w + final.b
    platt_a, platt_b = fit_platt(decisions, y)
    return LinearModel(
        schema_id=schema_id,
        feature_names=tuple(feature_names),
        w=final.w,
        b=final.b,
        platt_a=platt_a,
        platt_b=platt_b,
        standardizer=std,
        c_selected=best_c,
        seed=seed,
        cv_accuracy=cv_accuracy,
    )
