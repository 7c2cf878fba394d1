import math

import numpy as np
import pytest

from gtdetect import ToolkitError
from gtdetect.mauve import (
    DEFAULT_SMOOTHING,
    delta_mauve,
    divergence_frontier,
    kl_divergence,
    mauve_from_embeddings,
    mauve_score,
    quantize,
)


def smoothed(h):
    h = np.asarray(h, dtype=np.float64)
    h = h / h.sum()
    h = h + DEFAULT_SMOOTHING
    return h / h.sum()


class TestQuantize:
    def test_identical_sets_identical_histograms(self, np_rng):
        P = np_rng.normal(size=(30, 3))
        hp, hq = quantize(P, P.copy(), k=6, seed=0)
        assert np.array_equal(hp, hq)

    def test_separated_blobs_concentrate(self):
        A = np.full((20, 2), 100.0)
        B = np.full((20, 2), -100.0)
        ha, hb = quantize(A, B, k=2, seed=0)
        assert max(ha) >= 1.0 - 2 * DEFAULT_SMOOTHING
        assert max(hb) >= 1.0 - 2 * DEFAULT_SMOOTHING
        assert np.argmax(ha) != np.argmax(hb)

    def test_seed_determinism(self, np_rng):
        P = np_rng.normal(size=(25, 4))
        Q = np_rng.normal(size=(18, 4))
        a = quantize(P, Q, k=5, seed=11)
        b = quantize(P, Q, k=5, seed=11)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    def test_k_exceeding_pool_is_error(self, np_rng):
        P = np_rng.normal(size=(3, 2))
        with pytest.raises(ToolkitError, match="exceeds pooled sample count"):
            quantize(P, P, k=10, seed=0)

    def test_histograms_are_distributions(self, np_rng):
        P = np_rng.normal(size=(40, 3))
        Q = np_rng.normal(size=(22, 3)) + 1.0
        hp, hq = quantize(P, Q, k=7, seed=0)
        for h in (hp, hq):
            assert abs(h.sum() - 1.0) < 1e-12
            assert np.all(h > 0.0)

    def test_row_permutation_invariance(self, np_rng):
        P = np_rng.normal(size=(30, 3))
        Q = np_rng.normal(size=(30, 3)) + 0.5
        hp1, hq1 = quantize(P, Q, k=5, seed=2)
        perm_p = np_rng.permutation(30)
        perm_q = np_rng.permutation(30)
        hp2, hq2 = quantize(P[perm_p], Q[perm_q], k=5, seed=2)
        assert np.array_equal(hp1, hp2)
        assert np.array_equal(hq1, hq2)
        s1, _ = mauve_score(hp1, hq1)
        s2, _ = mauve_score(hp2, hq2)
        assert s1 == s2


class TestMauveScore:
    def test_identical_histograms_score_one(self, np_rng):
        P = np_rng.normal(size=(30, 3))
        hp, hq = quantize(P, P.copy(), k=6, seed=0)
        score, frontier = mauve_score(hp, hq)
        assert score == pytest.approx(1.0, abs=1e-6)
        assert (0.0, 1.0) in frontier and (1.0, 0.0) in frontier

    def test_disjoint_two_bin_matches_closed_form(self):
        hp = smoothed([1.0, 0.0])
        hq = smoothed([0.0, 1.0])
        c, L = 5.0, 25
        score, _ = mauve_score(hp, hq, c=c, grid_size=L)
        # independent recomputation: closed-form KL on 2-bin histograms,
        # integrated with numpy's trapezoid over the same lambda grid
        xs, ys = [0.0], [1.0]
        for i in range(L, 0, -1):
            lam = i / (L + 1.0)
            r = lam * hp + (1 - lam) * hq
            kl_q = float(np.sum(hq * np.log(hq / r)))
            kl_p = float(np.sum(hp * np.log(hp / r)))
            xs.append(math.exp(-c * kl_q))
            ys.append(math.exp(-c * kl_p))
        xs.append(1.0)
        ys.append(0.0)
        expected = float(np.trapezoid(ys, xs))
        assert score == pytest.approx(expected, abs=1e-6)
        assert score < 0.05

    def test_symmetry(self, np_rng):
        for _ in range(10):
            hp = smoothed(np_rng.uniform(0.0, 1.0, size=8))
            hq = smoothed(np_rng.uniform(0.0, 1.0, size=8))
            a, _ = mauve_score(hp, hq)
            b, _ = mauve_score(hq, hp)
            assert abs(a - b) < 1e-9

    def test_trapezoid_matches_fine_grid(self, np_rng):
        for _ in range(10):
            hp = smoothed(np_rng.uniform(0.0, 1.0, size=6))
            hq = smoothed(np_rng.uniform(0.0, 1.0, size=6))
            coarse, _ = mauve_score(hp, hq, grid_size=25)
            fine, _ = mauve_score(hp, hq, grid_size=10_000)
            assert abs(coarse - fine) < 1e-3

    def test_score_in_unit_interval(self, np_rng):
        for _ in range(20):
            hp = smoothed(np_rng.uniform(0.0, 1.0, size=5))
            hq = smoothed(np_rng.uniform(0.0, 1.0, size=5))
            score, _ = mauve_score(hp, hq)
            assert 0.0 <= score <= 1.0

    def test_unnormalized_histogram_rejected(self):
        with pytest.raises(ToolkitError, match="does not sum to 1"):
            mauve_score(np.array([0.5, 0.4]), np.array([0.5, 0.5]))

    def test_kl_finite_on_smoothed(self, np_rng):
        for _ in range(50):
            hp = smoothed(np_rng.uniform(0.0, 1.0, size=10))
            hq = smoothed(np_rng.uniform(0.0, 1.0, size=10))
            assert math.isfinite(kl_divergence(hp, hq))

    def test_frontier_sorted_by_x_in_unit_square(self, np_rng):
        hp = smoothed(np_rng.uniform(0.0, 1.0, size=6))
        hq = smoothed(np_rng.uniform(0.0, 1.0, size=6))
        frontier = divergence_frontier(hp, hq)
        xs = [p[0] for p in frontier]
        assert xs == sorted(xs)
        assert all(0.0 <= x <= 1.0 and 0.0 <= y <= 1.0 for x, y in frontier)


class TestDeltaMauve:
    def test_identical_adv_and_orig_is_zero(self, np_rng):
        ref = np_rng.normal(size=(25, 3))
        orig = np_rng.normal(size=(20, 3)) + 0.5
        rep = delta_mauve(ref, orig, orig.copy(), trials=4, k_clusters=6)
        assert rep.mean_delta == 0.0
        assert all(row["delta"] == 0.0 for row in rep.per_trial)

    def test_all_equal_is_zero(self, np_rng):
        ref = np_rng.normal(size=(15, 3))
        rep = delta_mauve(ref, ref.copy(), ref.copy(), trials=2, k_clusters=4)
        assert rep.mean_delta == 0.0

    def test_empty_adversarial_set(self, np_rng):
        ref = np_rng.normal(size=(10, 3))
        with pytest.raises(ToolkitError, match="insufficient successful attacks"):
            delta_mauve(ref, ref, np.zeros((0, 3)), trials=2)

    def test_degraded_adv_scores_negative(self, np_rng):
        ref = np_rng.normal(size=(60, 4))
        orig = np_rng.normal(size=(50, 4))  # same distribution as ref
        adv = np_rng.normal(size=(50, 4)) + 6.0  # far away
        rep = delta_mauve(ref, orig, adv, trials=3, k_clusters=10)
        assert rep.mean_delta < 0.0

    def test_trial_count_and_seeds(self, np_rng):
        ref = np_rng.normal(size=(20, 2))
        orig = np_rng.normal(size=(15, 2))
        adv = np_rng.normal(size=(15, 2)) + 1.0
        rep = delta_mauve(ref, orig, adv, trials=5, k_clusters=4)
        assert [row["seed"] for row in rep.per_trial] == [0, 1, 2, 3, 4]
        assert rep.mean_delta == pytest.approx(
            sum(r["delta"] for r in rep.per_trial) / 5, abs=1e-15
        )


class TestFromEmbeddings:
    def test_report_fields_and_default_k(self, np_rng):
        P = np_rng.normal(size=(40, 3))
        Q = np_rng.normal(size=(40, 3))
        rep = mauve_from_embeddings(P, Q, seed=0)
        assert rep.k == 8  # (40+40)//10
        assert rep.n_p == 40 and rep.n_q == 40
        assert 0.0 <= rep.mauve <= 1.0

    def test_dimension_mismatch(self, np_rng):
        with pytest.raises(ToolkitError, match="dimension mismatch"):
            quantize(np_rng.normal(size=(5, 3)), np_rng.normal(size=(5, 4)), k=2)
