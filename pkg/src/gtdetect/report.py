"""Report artifacts: deterministic JSON/CSV writers plus rendered figures.

Machine-readable files come first; figures are rendered next to them from
the same data.  All writers avoid timestamps and environment-dependent
content so that reruns produce byte-identical files.
"""

from __future__ import annotations

import json
from collections import Counter

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .statfeat import zipf_theoretical

# Pinned so PNG metadata does not vary with the matplotlib version.
_PNG_METADATA = {"Software": "gtdetect"}
_DPI = 120


def write_json(path: str, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def write_csv(path: str, header, rows) -> None:
    """Floats are serialized with repr (shortest round-trip form)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(repr(v) if isinstance(v, float) else str(v) for v in row) + "\n")


def _save(fig, path: str) -> None:
    fig.savefig(path, dpi=_DPI, metadata=_PNG_METADATA)
    plt.close(fig)


def zipf_plot_rows(lemma_counts: Counter, top_k: int = 30) -> list[tuple]:
    """(rank, lemma, observed normalized frequency, ideal Zipf frequency) rows.

    Observed frequency is the lemma count over all lemma occurrences; the
    ideal curve uses the full vocabulary size of the corpus.
    """
    total = sum(lemma_counts.values())
    vocab = len(lemma_counts)
    ranked = sorted(lemma_counts.items(), key=lambda kv: (-kv[1], kv[0]))
    rows = []
    for rank, (lemma, count) in enumerate(ranked[:top_k], start=1):
        rows.append((rank, lemma, count / total, zipf_theoretical(rank, vocab)))
    return rows


def render_zipf_figure(rows, path: str) -> None:
    ranks = [r[0] for r in rows]
    observed = [r[2] for r in rows]
    theoretical = [r[3] for r in rows]
    fig, ax = plt.subplots(figsize=(7, 5))
    ax.plot(ranks, observed, "o-", label="observed", markersize=4)
    ax.plot(ranks, theoretical, "--", label="ideal Zipf")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("rank")
    ax.set_ylabel("normalized frequency")
    ax.set_title("Word frequency vs rank")
    ax.legend()
    fig.tight_layout()
    _save(fig, path)


def render_weights_figure(weights_by_magnitude, path: str, top_n: int = 30) -> None:
    """Horizontal bar chart of SVM feature weights, largest magnitude on top.

    Only the top_n weights are drawn (ensemble models have 1000+); the full
    table belongs in the weights CSV.
    """
    shown = list(weights_by_magnitude)[:top_n]
    names = [name for name, _ in shown][::-1]
    values = [w for _, w in shown][::-1]
    fig, ax = plt.subplots(figsize=(7, 0.35 * max(10, len(names)) + 1.5))
    ax.barh(range(len(names)), values)
    ax.set_yticks(range(len(names)))
    ax.set_yticklabels(names, fontsize=8)
    ax.axvline(0.0, color="black", linewidth=0.8)
    ax.set_xlabel("weight")
    ax.set_title("Feature weights")
    fig.tight_layout()
    _save(fig, path)


def render_frontier_figure(frontier, path: str, label: str = "divergence frontier") -> None:
    xs = [p[0] for p in frontier]
    ys = [p[1] for p in frontier]
    fig, ax = plt.subplots(figsize=(5.5, 5))
    ax.plot(xs, ys, "o-", markersize=3, label=label)
    ax.set_xlim(0, 1.02)
    ax.set_ylim(0, 1.02)
    ax.set_xlabel("exp(-c KL(Q||R))")
    ax.set_ylabel("exp(-c KL(P||R))")
    ax.set_title("Divergence frontier")
    ax.legend()
    fig.tight_layout()
    _save(fig, path)


ATTACK_TABLE_HEADER = (
    "features", "attack", "success_rate", "pre_attack_accuracy",
    "post_attack_accuracy", "delta_mauve",
)


def attack_table_rows(entries) -> list[tuple]:
    """One row per (features, attack) campaign, mirroring the summary layout.

    Each entry needs "features", "attack", and a campaign "summary"; an
    optional "delta_mauve" fills the last column ("" when unavailable, e.g.
    too few successful attacks to score).
    """
    rows = []
    for e in entries:
        s = e["summary"]
        delta = e.get("delta_mauve")
        rows.append((
            e["features"],
            e["attack"],
            float(s["success_rate"]),
            float(s["pre_attack_accuracy"]),
            float(s["post_attack_accuracy"]),
            float(delta) if delta is not None else "",
        ))
    return rows


def render_delta_frontier_figure(frontier_orig, frontier_adv, path: str) -> None:
    """Original vs adversarial divergence frontiers on one axis (trial 0)."""
    fig, ax = plt.subplots(figsize=(5.5, 5))
    for frontier, label, style in (
        (frontier_orig, "original", "o-"),
        (frontier_adv, "adversarial", "s--"),
    ):
        ax.plot([p[0] for p in frontier], [p[1] for p in frontier], style,
                markersize=3, label=label)
    ax.set_xlim(0, 1.02)
    ax.set_ylim(0, 1.02)
    ax.set_xlabel("exp(-c KL(Q||R))")
    ax.set_ylabel("exp(-c KL(P||R))")
    ax.set_title("Divergence frontiers before/after attack")
    ax.legend()
    fig.tight_layout()
    _save(fig, path)


def render_accuracy_figure(rows, path: str) -> None:
    """Pre/post attack accuracy bars per campaign row (Table-II style view)."""
    labels = [r["label"] for r in rows]
    pre = [r["pre"] for r in rows]
    post = [r["post"] for r in rows]
    x = range(len(rows))
    fig, ax = plt.subplots(figsize=(max(5, 1.6 * len(rows)), 4.5))
    width = 0.38
    ax.bar([i - width / 2 for i in x], pre, width, label="pre-attack")
    ax.bar([i + width / 2 for i in x], post, width, label="post-attack")
    ax.set_xticks(list(x))
    ax.set_xticklabels(labels, fontsize=8)
    ax.set_ylim(0, 1.0)
    ax.set_ylabel("accuracy")
    ax.set_title("Detection accuracy under attack")
    ax.legend()
    fig.tight_layout()
    _save(fig, path)
