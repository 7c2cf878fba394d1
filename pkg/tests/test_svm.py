import numpy as np
import pytest

from gtdetect import ToolkitError
from gtdetect.statfeat import STAT_FEATURE_NAMES
from gtdetect.svm import (
    LinearModel,
    fit_platt,
    grid_search,
    labels_to_signs,
    train,
)


def qp_oracle_objective(X, y, C, tol=1e-9, max_iters=50_000):
    """Brute-force projected-gradient minimizer of the dual QP.

    Full-gradient steps with Nesterov momentum and monotone restarts on the
    bias-augmented Gram matrix; entirely independent of the coordinate
    descent path used by train().
    """
    Xa = np.hstack([X, np.ones((len(X), 1))])
    G = (y[:, None] * Xa) @ (y[:, None] * Xa).T
    lam = max(np.linalg.eigvalsh(G)[-1], 1e-12)
    eta = 1.0 / lam
    alpha = np.zeros(len(y))
    vel = alpha.copy()
    t_prev = 1.0
    f_prev = np.inf
    for _ in range(max_iters):
        grad = G @ vel - 1.0
        new_alpha = np.clip(vel - eta * grad, 0.0, C)
        f_new = 0.5 * new_alpha @ G @ new_alpha - new_alpha.sum()
        if f_new > f_prev:  # restart momentum
            vel = alpha.copy()
            t_prev = 1.0
            continue
        t_new = (1.0 + np.sqrt(1.0 + 4.0 * t_prev**2)) / 2.0
        vel = new_alpha + ((t_prev - 1.0) / t_new) * (new_alpha - alpha)
        stalled = abs(f_prev - f_new) < tol * max(1.0, abs(f_new))
        alpha, t_prev, f_prev = new_alpha, t_new, f_new
        if stalled:
            break
    return 0.5 * alpha @ G @ alpha - alpha.sum()


def separable_1d():
    X = np.array([[-2.0], [-1.0], [1.0], [2.0]])
    y = np.array([-1.0, -1.0, 1.0, 1.0])
    return X, y


class TestTrain:
    def test_separable_reaches_perfect_accuracy(self):
        X, y = separable_1d()
        res = train(X, y, C=1.0, seed=0)
        margin = X @ res.w + res.b
        assert np.all(np.where(margin >= 0, 1.0, -1.0) == y)
        assert res.w[0] > 0

    def test_label_flip_negates_weights(self):
        X, y = separable_1d()
        a = train(X, y, C=1.0, seed=0)
        b = train(X, -y, C=1.0, seed=0)
        assert np.allclose(a.w, -b.w, atol=1e-9)
        assert a.b == pytest.approx(-b.b, abs=1e-9)

    def test_dual_objective_matches_qp_oracle(self, np_rng):
        for trial in range(5):
            X = np_rng.normal(size=(20, 2))
            y = np.where(X[:, 0] + 0.3 * np_rng.normal(size=20) > 0, 1.0, -1.0)
            if len(set(y)) < 2:
                continue
            res = train(X, y, C=1.0, seed=trial, tol=1e-6, max_epochs=5000)
            assert abs(res.dual_objective() - qp_oracle_objective(X, y, 1.0)) < 1e-4

    def test_dual_feasibility_and_w_reconstruction(self, np_rng):
        X = np_rng.normal(size=(30, 3))
        y = np.where(X[:, 1] > 0, 1.0, -1.0)
        C = 2.5
        res = train(X, y, C=C, seed=0)
        assert np.all(res.alpha >= -1e-12)
        assert np.all(res.alpha <= C + 1e-12)
        Xa = np.hstack([X, np.ones((30, 1))])
        w_rebuilt = (res.alpha * y) @ Xa
        assert np.allclose(w_rebuilt[:-1], res.w, atol=1e-6)
        assert w_rebuilt[-1] == pytest.approx(res.b, abs=1e-6)

    def test_objective_non_increasing(self, np_rng):
        X = np_rng.normal(size=(40, 4))
        y = np.where(X[:, 0] - X[:, 2] > 0, 1.0, -1.0)
        res = train(X, y, C=10.0, seed=0)
        for before, after in zip(res.objectives, res.objectives[1:]):
            assert after <= before + 1e-9

    def test_single_class_is_error(self):
        X = np.array([[1.0], [2.0]])
        with pytest.raises(ToolkitError, match="both classes"):
            train(X, np.array([1.0, 1.0]), C=1.0)

    def test_determinism(self, np_rng):
        X = np_rng.normal(size=(25, 3))
        y = np.where(X[:, 0] > 0, 1.0, -1.0)
        a = train(X, y, C=1.0, seed=7)
        b = train(X, y, C=1.0, seed=7)
        assert np.array_equal(a.w, b.w)
        assert a.b == b.b
        assert np.array_equal(a.alpha, b.alpha)


class TestPlatt:
    def test_zero_decision_is_half_when_b_zero(self):
        from gtdetect.svm import _sigmoid_platt

        assert _sigmoid_platt(0.0, -2.0, 0.0) == pytest.approx(0.5)

    def test_monotone_for_negative_a(self):
        from gtdetect.svm import _sigmoid_platt

        fs = np.linspace(-4, 4, 33)
        ps = [_sigmoid_platt(f, -1.5, 0.3) for f in fs]
        assert all(b > a for a, b in zip(ps, ps[1:]))

    def test_binary_complement(self):
        from gtdetect.svm import _sigmoid_platt

        for f in (-2.0, 0.0, 1.7):
            p = _sigmoid_platt(f, -1.0, 0.2)
            assert p + (1.0 - p) == pytest.approx(1.0, abs=0)

    def test_calibration_separates_classes(self, np_rng):
        decisions = np.concatenate([np_rng.normal(-2, 0.5, 50), np_rng.normal(2, 0.5, 50)])
        y = np.concatenate([-np.ones(50), np.ones(50)])
        a, b = fit_platt(decisions, y)
        assert a < 0  # higher decision value => higher machine probability
        from gtdetect.svm import _sigmoid_platt

        assert _sigmoid_platt(2.0, a, b) > 0.9
        assert _sigmoid_platt(-2.0, a, b) < 0.1


def labeled(y):
    return ["machine" if v > 0 else "human" for v in y]


class TestGridSearch:
    def test_tie_selects_smallest_c(self, np_rng):
        # trivially separable: every C reaches identical CV accuracy
        X = np.vstack([np_rng.normal(-5, 0.1, size=(20, 2)), np_rng.normal(5, 0.1, size=(20, 2))])
        y = np.concatenate([-np.ones(20), np.ones(20)])
        model = grid_search(X, labeled(y), "s2", ("f1", "f2"), grid=(1, 10, 100), folds=4, seed=0)
        accs = set(model.cv_accuracy.values())
        assert len(accs) == 1
        assert model.c_selected == 1.0

    def test_singleton_grid_skips_search(self, np_rng):
        X = np_rng.normal(size=(12, 2))
        y = np.where(X[:, 0] > 0, 1.0, -1.0)
        model = grid_search(X, labeled(y), "s2", ("f1", "f2"), grid=(10,), folds=5, seed=0)
        assert model.c_selected == 10.0
        assert model.cv_accuracy == {}

    def test_scaling_invariance_of_predictions(self, np_rng):
        X = np_rng.normal(size=(40, 3))
        y = np.where(X[:, 0] + X[:, 1] > 0, 1.0, -1.0)
        m1 = grid_search(X, labeled(y), "s3", ("a", "b", "c"), grid=(1,), folds=3, seed=0)
        m2 = grid_search(X * 1000.0, labeled(y), "s3", ("a", "b", "c"), grid=(1,), folds=3, seed=0)
        p1 = [m1.predict(x) for x in X]
        p2 = [m2.predict(x) for x in X * 1000.0]
        assert p1 == p2

    def test_feature_weights_shape_and_signal(self, np_rng):
        n = 60
        signal = np.where(np.arange(n) < n // 2, -1.0, 1.0)
        X = np_rng.normal(size=(n, 10)) * 0.05
        X[:, 1] = signal + np_rng.normal(size=n) * 0.01
        model = grid_search(X, labeled(signal), "s10", STAT_FEATURE_NAMES, grid=(1,), folds=3, seed=0)
        weights = model.feature_weights()
        assert [name for name, _ in weights] == list(STAT_FEATURE_NAMES)
        assert len(weights) == 10
        top_name, _ = model.feature_weights_by_magnitude()[0]
        assert top_name == STAT_FEATURE_NAMES[1]

    def test_serialized_model_bit_identical(self, tmp_path, np_rng):
        X = np_rng.normal(size=(30, 4))
        y = np.where(X[:, 0] > 0.2, 1.0, -1.0)
        m1 = grid_search(X, labeled(y), "s4", ("a", "b", "c", "d"), grid=(1, 10), folds=3, seed=0)
        m2 = grid_search(X, labeled(y), "s4", ("a", "b", "c", "d"), grid=(1, 10), folds=3, seed=0)
        assert m1.to_json() == m2.to_json()

    def test_save_load_roundtrip(self, tmp_path, np_rng):
        X = np_rng.normal(size=(20, 2))
        y = np.where(X[:, 0] > 0, 1.0, -1.0)
        model = grid_search(X, labeled(y), "s2", ("a", "b"), grid=(1,), folds=2, seed=0)
        path = tmp_path / "model.json"
        model.save(str(path))
        loaded = LinearModel.load(str(path))
        assert loaded.to_json() == model.to_json()
        v = np.array([0.3, -0.4])
        assert loaded.predict_proba(v) == model.predict_proba(v)

    def test_unlabeled_rejected(self):
        with pytest.raises(ToolkitError, match="unlabeled"):
            labels_to_signs(["machine", None])


class TestPredict:
    def test_probability_complement_and_threshold(self, np_rng):
        X = np_rng.normal(size=(30, 2))
        y = np.where(X[:, 0] > 0, 1.0, -1.0)
        model = grid_search(X, labeled(y), "s2", ("a", "b"), grid=(1,), folds=3, seed=0)
        for x in X[:5]:
            p = model.predict_proba(x)
            assert 0.0 <= p <= 1.0
            assert model.predict(x) == ("machine" if p >= 0.5 else "human")
