"""MAUVE scoring between two embedded text collections.

Both collections are quantized jointly by k-means (seeded greedy
farthest-point initialization, Lloyd iterations to an assignment fixpoint),
giving a pair of smoothed cluster-occupancy histograms P and Q.  For mixture
weights lambda on a grid, the divergence frontier collects points
(exp(-c*KL(Q||R)), exp(-c*KL(P||R))) with R = lambda*P + (1-lambda)*Q, plus
the endpoints (0,1) and (1,0).  MAUVE is the trapezoidal area under the
x-sorted frontier; identical collections score 1.

Delta-MAUVE quantifies attack damage: MAUVE(reference, adversarial) minus
MAUVE(reference, original), averaged over independently seeded trials.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import ToolkitError
from .rng import Xorshift64Star

DEFAULT_C = 5.0
DEFAULT_GRID_SIZE = 25
DEFAULT_SMOOTHING = 1e-6
KMEANS_MAX_ITERS = 300


def default_cluster_count(n_p: int, n_q: int) -> int:
    return max(2, min(500, (n_p + n_q) // 10))


@dataclass
class MauveReport:
    mauve: float
    frontier: list[tuple[float, float]]
    c: float
    k: int
    seed: int
    grid_size: int
    n_p: int
    n_q: int


@dataclass
class DeltaMauveReport:
    mean_delta: float
    per_trial: list[dict] = field(default_factory=list)
    k: int = 0
    c: float = DEFAULT_C
    # trial-0 frontiers, kept for plotting
    frontier_orig: list[tuple[float, float]] = field(default_factory=list)
    frontier_adv: list[tuple[float, float]] = field(default_factory=list)


def _kmeans(points_raw: np.ndarray, k: int, seed: int) -> np.ndarray:
    """Cluster assignments; deterministic given the seed and invariant to row order.

    Points are processed in canonical (lexicographic) order so that the seeded
    initialization and all tie-breaks are independent of how rows were stored.
    """
    canonical = np.lexsort(points_raw.T[::-1])
    points = points_raw[canonical]
    n = points.shape[0]
    rng = Xorshift64Star(seed)
    centers = np.empty((k, points.shape[1]))
    first = rng.randrange(n)
    centers[0] = points[first]
    min_d2 = np.sum((points - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        centers[j] = points[int(np.argmax(min_d2))]
        d2 = np.sum((points - centers[j]) ** 2, axis=1)
        min_d2 = np.minimum(min_d2, d2)

    assign = None
    for _ in range(KMEANS_MAX_ITERS):
        d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_assign = np.argmin(d2, axis=1)
        if assign is not None and np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for j in range(k):
            members = points[assign == j]
            if len(members):
                centers[j] = members.mean(axis=0)  # empty clusters keep their center
    out = np.empty(n, dtype=np.int64)
    out[canonical] = assign
    return out


def quantize(
    embeddings_p: np.ndarray,
    embeddings_q: np.ndarray,
    k: int,
    seed: int = 0,
    smoothing: float = DEFAULT_SMOOTHING,
) -> tuple[np.ndarray, np.ndarray]:
    """Joint k-means quantization into a pair of smoothed occupancy histograms."""
    P = np.asarray(embeddings_p, dtype=np.float64)
    Q = np.asarray(embeddings_q, dtype=np.float64)
    if P.ndim != 2 or Q.ndim != 2 or P.shape[0] < 1 or Q.shape[0] < 1:
        raise ToolkitError("quantize needs non-empty 2-D embedding arrays")
    if P.shape[1] != Q.shape[1]:
        raise ToolkitError(f"embedding dimension mismatch: {P.shape[1]} vs {Q.shape[1]}")
    if k < 2:
        raise ToolkitError("cluster count must be at least 2")
    pooled = np.vstack([P, Q])
    if k > pooled.shape[0]:
        raise ToolkitError(f"cluster count {k} exceeds pooled sample count {pooled.shape[0]}")
    assign = _kmeans(pooled, k, seed)

    def hist(rows: np.ndarray) -> np.ndarray:
        h = np.bincount(rows, minlength=k).astype(np.float64)
        h /= h.sum()
        h += smoothing
        return h / h.sum()

    return hist(assign[: P.shape[0]]), hist(assign[P.shape[0] :])


def kl_divergence(p: np.ndarray, q: np.ndarray) -> float:
    """KL(p || q) in nats; inputs must be strictly positive (smoothed) histograms."""
    return float(np.sum(p * np.log(p / q)))


def divergence_frontier(
    hist_p: np.ndarray, hist_q: np.ndarray, c: float = DEFAULT_C, grid_size: int = DEFAULT_GRID_SIZE
) -> list[tuple[float, float]]:
    """Frontier points ordered by non-decreasing x, endpoints included."""
    points = [(0.0, 1.0)]
    # Descending lambda makes x = exp(-c*KL(Q||R)) increase along the list.
    for i in range(grid_size, 0, -1):
        lam = i / (grid_size + 1.0)
        r = lam * hist_p + (1.0 - lam) * hist_q
        x = float(np.exp(-c * kl_divergence(hist_q, r)))
        y = float(np.exp(-c * kl_divergence(hist_p, r)))
        points.append((x, y))
    points.append((1.0, 0.0))
    return points


def mauve_score(
    hist_p: np.ndarray,
    hist_q: np.ndarray,
    c: float = DEFAULT_C,
    grid_size: int = DEFAULT_GRID_SIZE,
) -> tuple[float, list[tuple[float, float]]]:
    """Area under the divergence frontier; 1.0 iff the histograms coincide."""
    hist_p = np.asarray(hist_p, dtype=np.float64)
    hist_q = np.asarray(hist_q, dtype=np.float64)
    if hist_p.shape != hist_q.shape:
        raise ToolkitError("histogram length mismatch")
    for name, h in (("P", hist_p), ("Q", hist_q)):
        if abs(float(h.sum()) - 1.0) > 1e-9:
            raise ToolkitError(f"histogram {name} does not sum to 1")
        if np.any(h <= 0.0):
            raise ToolkitError(f"histogram {name} has non-positive mass (smoothing missing?)")
    frontier = divergence_frontier(hist_p, hist_q, c=c, grid_size=grid_size)
    area = 0.0
    for (x1, y1), (x2, y2) in zip(frontier, frontier[1:]):
        area += (x2 - x1) * (y1 + y2) / 2.0
    return min(1.0, max(0.0, area)), frontier


def mauve_from_embeddings(
    embeddings_p,
    embeddings_q,
    k: int | None = None,
    seed: int = 0,
    c: float = DEFAULT_C,
    grid_size: int = DEFAULT_GRID_SIZE,
    smoothing: float = DEFAULT_SMOOTHING,
) -> MauveReport:
    P = np.asarray(embeddings_p, dtype=np.float64)
    Q = np.asarray(embeddings_q, dtype=np.float64)
    if k is None:
        k = default_cluster_count(P.shape[0], Q.shape[0])
        k = min(k, P.shape[0] + Q.shape[0])
    hist_p, hist_q = quantize(P, Q, k, seed=seed, smoothing=smoothing)
    score, frontier = mauve_score(hist_p, hist_q, c=c, grid_size=grid_size)
    return MauveReport(
        mauve=score, frontier=frontier, c=c, k=k, seed=seed,
        grid_size=grid_size, n_p=P.shape[0], n_q=Q.shape[0],
    )


def delta_mauve(
    ref_embeddings,
    orig_embeddings,
    adv_embeddings,
    trials: int = 10,
    c: float = DEFAULT_C,
    k_clusters: int | None = None,
    grid_size: int = DEFAULT_GRID_SIZE,
    smoothing: float = DEFAULT_SMOOTHING,
) -> DeltaMauveReport:
    """Mean over trials of MAUVE(ref, adv) - MAUVE(ref, orig); trial t uses seed t."""
    ref = np.asarray(ref_embeddings, dtype=np.float64)
    orig = np.asarray(orig_embeddings, dtype=np.float64)
    adv = np.asarray(adv_embeddings, dtype=np.float64)
    if adv.ndim != 2 or adv.shape[0] < 1:
        raise ToolkitError("insufficient successful attacks")
    if trials < 1:
        raise ToolkitError("trials must be >= 1")
    if k_clusters is None:
        k_clusters = default_cluster_count(ref.shape[0], orig.shape[0])
        k_clusters = min(k_clusters, ref.shape[0] + min(orig.shape[0], adv.shape[0]))
    per_trial = []
    frontier_orig: list = []
    frontier_adv: list = []
    for t in range(trials):
        rep_orig = mauve_from_embeddings(ref, orig, k=k_clusters, seed=t, c=c,
                                         grid_size=grid_size, smoothing=smoothing)
        rep_adv = mauve_from_embeddings(ref, adv, k=k_clusters, seed=t, c=c,
                                        grid_size=grid_size, smoothing=smoothing)
        if t == 0:
            frontier_orig, frontier_adv = rep_orig.frontier, rep_adv.frontier
        per_trial.append({"trial": t, "seed": t, "mauve_orig": rep_orig.mauve,
                          "mauve_adv": rep_adv.mauve, "delta": rep_adv.mauve - rep_orig.mauve})
    mean_delta = sum(row["delta"] for row in per_trial) / trials
    return DeltaMauveReport(
        mean_delta=mean_delta, per_trial=per_trial, k=k_clusters, c=c,
        frontier_orig=frontier_orig, frontier_adv=frontier_adv,
    )
