"""Shared assembly between CLI subcommands: corpus loading, featurization,
feature-set construction, and victim wiring.

Featurization of many documents can fan out over worker processes; results
keep input order, so the worker count never changes any output.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import ToolkitError
from .corpus import Document, PhraseList, balanced_sample, load_jsonl, load_phrase_list
from .featurestore import EmbeddingTable, concat, load_embeddings
from .statfeat import STAT_FEATURE_NAMES, STAT_SCHEMA_ID, featurize_stat
from .textproc import LemmaRules, load_rules, process

FEATURE_SETS = ("stat", "neural", "ensemble")


@dataclass(frozen=True)
class FeaturizeContext:
    """Everything needed to turn raw text into the 10-dim statistical vector."""

    rules: LemmaRules
    cliches: PhraseList
    idioms: PhraseList
    archaisms: PhraseList

    @classmethod
    def build(
        cls,
        cliches_path: str | None = None,
        idioms_path: str | None = None,
        archaisms_path: str | None = None,
        lemma_exceptions_path: str | None = None,
        suffix_rules_path: str | None = None,
        pos_lexicon_path: str | None = None,
        abbreviations_path: str | None = None,
    ) -> "FeaturizeContext":
        from importlib import resources

        rules = load_rules(
            exceptions_path=lemma_exceptions_path,
            suffix_rules_path=suffix_rules_path,
            pos_lexicon_path=pos_lexicon_path,
            abbreviations_path=abbreviations_path,
        )

        def plist(path, kind, default):
            if path is None:
                path = str(resources.files("gtdetect.data").joinpath(default))
            return load_phrase_list(path, kind)

        return cls(
            rules=rules,
            cliches=plist(cliches_path, "cliche", "cliches.txt"),
            idioms=plist(idioms_path, "idiom", "idioms.txt"),
            archaisms=plist(archaisms_path, "archaism", "archaisms.txt"),
        )

    def featurize_text(self, text: str) -> list[float]:
        doc = process(text, self.rules)
        return featurize_stat(doc, self.cliches, self.idioms, self.archaisms, self.rules).to_vector()


_WORKER_CTX: FeaturizeContext | None = None


def _init_worker(ctx_paths: dict):
    global _WORKER_CTX
    _WORKER_CTX = FeaturizeContext.build(**ctx_paths)


def _featurize_one(text: str) -> list[float]:
    return _WORKER_CTX.featurize_text(text)


def featurize_docs(
    docs: list[Document],
    ctx: FeaturizeContext,
    jobs: int = 1,
    ctx_paths: dict | None = None,
) -> np.ndarray:
    """Statistical feature matrix in document order."""
    texts = [d.text for d in docs]
    if jobs <= 1 or len(docs) < 8:
        rows = [ctx.featurize_text(t) for t in texts]
    else:
        workers = min(jobs, max(1, len(docs) // 8))
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_init_worker, initargs=(ctx_paths or {},)
        ) as pool:
            rows = list(pool.map(_featurize_one, texts, chunksize=16))
    return np.asarray(rows, dtype=np.float64)


def default_jobs() -> int:
    return os.cpu_count() or 1


def load_labeled_docs(
    docs_path: str | None = None,
    human_path: str | None = None,
    machine_path: str | None = None,
    n_per_class: int | None = None,
    seed: int = 0,
) -> list[Document]:
    """Load from a single labeled file or a human/machine file pair, optionally sampling."""
    if docs_path is not None:
        docs = load_jsonl(docs_path)
        if human_path or machine_path:
            raise ToolkitError("--docs cannot be combined with --human/--machine")
    elif human_path is not None and machine_path is not None:
        docs = load_jsonl(human_path, force_label="human") + load_jsonl(
            machine_path, force_label="machine"
        )
    else:
        raise ToolkitError("need --docs FILE or both --human FILE and --machine FILE")
    if n_per_class is not None:
        human = [d for d in docs if d.label == "human"]
        machine = [d for d in docs if d.label == "machine"]
        docs = balanced_sample(machine, human, n_per_class, seed=seed)
    return docs


def build_feature_matrix(
    docs: list[Document],
    feature_set: str,
    ctx: FeaturizeContext | None = None,
    embeddings: EmbeddingTable | None = None,
    jobs: int = 1,
    ctx_paths: dict | None = None,
):
    """(feature_names, schema_id, matrix) for stat, neural, or ensemble features."""
    if feature_set not in FEATURE_SETS:
        raise ToolkitError(f"unknown feature set {feature_set!r}")
    if feature_set in ("stat", "ensemble"):
        if ctx is None:
            raise ToolkitError("statistical featurization context required")
        stat_matrix = featurize_docs(docs, ctx, jobs=jobs, ctx_paths=ctx_paths)
    if feature_set in ("neural", "ensemble"):
        if embeddings is None:
            raise ToolkitError(f"feature set {feature_set!r} requires --embeddings")
        neural_rows = [embeddings.get(d.id) for d in docs]
        neural_names = tuple(f"e{i}" for i in range(embeddings.dim))

    if feature_set == "stat":
        return STAT_FEATURE_NAMES, STAT_SCHEMA_ID, stat_matrix
    if feature_set == "neural":
        return neural_names, embeddings.schema_id, np.asarray(neural_rows)
    rows, names = [], STAT_FEATURE_NAMES + neural_names
    schema_id = None
    for stat_row, neural_row in zip(stat_matrix, neural_rows):
        merged, schema_id = concat(stat_row, neural_row, STAT_SCHEMA_ID, embeddings.schema_id)
        rows.append(merged)
    return names, schema_id, np.asarray(rows)


def make_stat_victim(model, ctx: FeaturizeContext):
    """text -> P(machine) through the statistical featurization pipeline."""
    if model.schema_id != STAT_SCHEMA_ID:
        raise ToolkitError(
            f"victim pipeline supports schema {STAT_SCHEMA_ID!r} only, model has {model.schema_id!r}"
        )

    def score(text: str) -> float:
        return model.predict_proba(ctx.featurize_text(text))

    return score


def load_word_embeddings(path: str):
    from .attack import WordEmbeddingIndex

    return WordEmbeddingIndex(load_embeddings(path))
