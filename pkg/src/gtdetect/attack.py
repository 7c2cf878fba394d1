"""Black-box targeted attacks against probability-emitting text detectors.

The victim interface is a single function text -> probability that the text
is machine-generated; attacks see nothing else.  Both attacks share one
deletion-based word importance ranking and a greedy search:

* deepwordbug: small character edits (adjacent interior swaps, interior
  deletions, duplications, deterministic QWERTY substitutions) under a total
  Levenshtein budget.
* textfooler: whole-word synonym substitution from nearest neighbors in a
  word embedding space, constrained by cosine similarity, coarse POS match,
  and optionally a document-level similarity threshold.

Attacks are targeted: type1 turns human-classified text into machine
(a false positive), type2 turns machine-classified text into human.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import ToolkitError
from .featurestore import EmbeddingTable
from .textproc import WORD_RE, levenshtein, load_stopwords, pos_tag

DIRECTIONS = ("type1", "type2")

# First listed neighbor is the deterministic substitution.
_QWERTY_NEIGHBORS = {
    "q": "wa", "w": "qe", "e": "wr", "r": "et", "t": "ry", "y": "tu", "u": "yi",
    "i": "uo", "o": "ip", "p": "ol",
    "a": "sq", "s": "ad", "d": "sf", "f": "dg", "g": "fh", "h": "gj", "j": "hk",
    "k": "jl", "l": "kp",
    "z": "xa", "x": "zc", "c": "xv", "v": "cb", "b": "vn", "n": "bm", "m": "nj",
    "1": "2q", "2": "13", "3": "24", "4": "35", "5": "46", "6": "57", "7": "68",
    "8": "79", "9": "80", "0": "9p",
}


@dataclass(frozen=True)
class AttackGoal:
    direction: str  # type1: human -> machine, type2: machine -> human

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise ToolkitError(f"unknown attack direction {self.direction!r}")

    @property
    def target_label(self) -> str:
        return "machine" if self.direction == "type1" else "human"


@dataclass
class AttackConfig:
    max_levenshtein_total: int = 30
    max_candidates_per_word: int = 50
    min_word_cos: float = 0.5
    stopwords: frozenset = field(default_factory=load_stopwords)
    query_budget: int = 0  # 0 = unlimited
    seed: int = 0
    min_doc_cos: float | None = None  # only used when a doc encoder is supplied

    def __post_init__(self):
        if self.max_levenshtein_total < 0 or self.query_budget < 0:
            raise ToolkitError("attack budgets must be positive or the 0 sentinel")
        if self.max_candidates_per_word < 1:
            raise ToolkitError("max_candidates_per_word must be positive")


@dataclass
class EditRecord:
    position: int  # word-token index in the document
    original: str
    replacement: str
    prob_after: float  # current-class probability right after the commit

    def to_dict(self):
        return {
            "position": self.position,
            "original": self.original,
            "replacement": self.replacement,
            "prob_after": self.prob_after,
        }


@dataclass
class AttackResult:
    doc_id: str
    original: str
    perturbed: str
    success: bool
    queries_used: int
    edits: list[EditRecord]
    pre_label: str
    post_label: str
    pre_prob: float  # probability of machine on the original text
    post_prob: float  # probability of machine on the perturbed text
    direction: str
    kind: str
    status: str  # success | failed | skipped-already-target

    def to_dict(self):
        return {
            "doc_id": self.doc_id,
            "original": self.original,
            "perturbed": self.perturbed,
            "success": self.success,
            "queries_used": self.queries_used,
            "edits": [e.to_dict() for e in self.edits],
            "pre_label": self.pre_label,
            "post_label": self.post_label,
            "pre_prob": self.pre_prob,
            "post_prob": self.post_prob,
            "direction": self.direction,
            "kind": self.kind,
            "status": self.status,
        }


class _BudgetExhausted(Exception):
    pass


class CountingVictim:
    """Counts every victim call and enforces the per-sample query budget."""

    def __init__(self, fn: Callable[[str], float], budget: int = 0):
        self.fn = fn
        self.budget = budget
        self.calls = 0

    def __call__(self, text: str) -> float:
        if self.budget and self.calls >= self.budget:
            raise _BudgetExhausted()
        self.calls += 1
        return float(self.fn(text))


class SegmentedText:
    """Text split into word and gap segments so edits preserve all spacing."""

    def __init__(self, text: str, parts: list[str] | None = None, slots: list[int] | None = None):
        if parts is None:
            parts, slots = [], []
            pos = 0
            for m in WORD_RE.finditer(text):
                if m.start() > pos:
                    parts.append(text[pos : m.start()])
                slots.append(len(parts))
                parts.append(m.group())
                pos = m.end()
            if pos < len(text):
                parts.append(text[pos:])
        self.parts = parts
        self.slots = slots  # indices into parts that are word tokens

    @property
    def words(self) -> list[str]:
        return [self.parts[i] for i in self.slots]

    def text(self) -> str:
        return "".join(self.parts)

    def text_with_replacement(self, word_idx: int, replacement: str) -> str:
        saved = self.parts[self.slots[word_idx]]
        self.parts[self.slots[word_idx]] = replacement
        out = "".join(self.parts)
        self.parts[self.slots[word_idx]] = saved
        return out

    def text_with_deletion(self, word_idx: int) -> str:
        return self.text_with_replacement(word_idx, "")

    def commit(self, word_idx: int, replacement: str) -> None:
        self.parts[self.slots[word_idx]] = replacement


def _current_class_prob(p_machine: float, current_label: str) -> float:
    return p_machine if current_label == "machine" else 1.0 - p_machine


def _label_of(p_machine: float) -> str:
    return "machine" if p_machine >= 0.5 else "human"


def _considered_indices(words: list[str], stopwords: frozenset) -> list[int]:
    return [i for i, w in enumerate(words) if w.lower() not in stopwords]


def _importance_order(victim, seg: SegmentedText, indices: list[int], base_cur_prob: float, pre_label: str) -> list[int]:
    """Deletion saliency: how much removing each word lowers the current-class probability."""
    importance = {}
    for i in indices:
        p = victim(seg.text_with_deletion(i))
        importance[i] = base_cur_prob - _current_class_prob(p, pre_label)
    return sorted(indices, key=lambda i: (-importance[i], i))


def rank_word_importance(victim_fn, text: str, stopwords: frozenset | None = None) -> list[int]:
    """Word indices by descending deletion importance (stopwords excluded).

    Consumes exactly 1 + n victim queries for n considered tokens.
    """
    if stopwords is None:
        stopwords = load_stopwords()
    victim = CountingVictim(victim_fn)
    seg = SegmentedText(text)
    if not seg.slots:
        raise ToolkitError("no tokens")
    p0 = victim(text)
    pre_label = _label_of(p0)
    indices = _considered_indices(seg.words, stopwords)
    return _importance_order(victim, seg, indices, _current_class_prob(p0, pre_label), pre_label)


def char_edit_candidates(token: str) -> list[str]:
    """DeepWordBug-style character edits of one token, deduplicated in order.

    Swaps touch adjacent interior character pairs, deletions interior
    characters; duplications and keyboard substitutions touch every character.
    """
    chars = list(token)
    n = len(chars)
    raw: list[str] = []
    for i in range(1, n - 2):
        if chars[i] != chars[i + 1]:
            c = chars.copy()
            c[i], c[i + 1] = c[i + 1], c[i]
            raw.append("".join(c))
    for i in range(1, n - 1):
        raw.append("".join(chars[:i] + chars[i + 1 :]))
    for i in range(n):
        raw.append("".join(chars[: i + 1] + chars[i:]))
    for i in range(n):
        nb = _QWERTY_NEIGHBORS.get(chars[i].lower())
        if nb:
            sub = nb[0].upper() if chars[i].isupper() else nb[0]
            if sub != chars[i]:
                c = chars.copy()
                c[i] = sub
                raw.append("".join(c))
    out, seen = [], {token}
    for cand in raw:
        if cand and cand not in seen:
            seen.add(cand)
            out.append(cand)
    return out


def _finalize(
    doc_id, seg, original, success, victim, edits, pre_label, cur_prob, p0, goal, kind, status=None
) -> AttackResult:
    post_label = _label_of(cur_prob)
    if status is None:
        status = "success" if success else "failed"
    return AttackResult(
        doc_id=doc_id,
        original=original,
        perturbed=seg.text(),
        success=success,
        queries_used=victim.calls,
        edits=edits,
        pre_label=pre_label,
        post_label=post_label,
        pre_prob=p0,
        post_prob=cur_prob,
        direction=goal.direction,
        kind=kind,
        status=status,
    )


def _greedy_attack(victim_fn, doc_id, text, goal, config, candidate_fn, kind) -> AttackResult:
    """Shared greedy loop; candidate_fn(token, remaining_budget) yields (replacement, cost)."""
    victim = CountingVictim(victim_fn, config.query_budget)
    seg = SegmentedText(text)
    if not seg.slots:
        raise ToolkitError("no tokens")
    edits: list[EditRecord] = []
    p0 = cur_prob = 0.0
    pre_label = "human"
    try:
        p0 = cur_prob = victim(text)
        pre_label = _label_of(p0)
        if pre_label == goal.target_label:
            return _finalize(
                doc_id, seg, text, False, victim, edits, pre_label, cur_prob, p0, goal, kind,
                status="skipped-already-target",
            )
        if kind == "dwb" and config.max_levenshtein_total <= 0:
            return _finalize(doc_id, seg, text, False, victim, edits, pre_label, cur_prob, p0, goal, kind)

        cur_class_prob = _current_class_prob(p0, pre_label)
        indices = _considered_indices(seg.words, config.stopwords)
        order = _importance_order(victim, seg, indices, cur_class_prob, pre_label)

        spent = 0
        budget = config.max_levenshtein_total
        for i in order:
            if kind == "dwb" and spent >= budget:
                break
            token = seg.words[i]
            remaining = (budget - spent) if kind == "dwb" else None
            best = None  # (cur_class_prob, raw_prob, replacement, cost)
            for replacement, cost in candidate_fn(token, remaining, seg, i):
                try:
                    p = victim(seg.text_with_replacement(i, replacement))
                except ToolkitError:
                    continue  # candidate broke featurization; skip it
                cand_cur = _current_class_prob(p, pre_label)
                if best is None or cand_cur < best[0]:
                    best = (cand_cur, p, replacement, cost)
            if best is not None and best[0] < cur_class_prob:
                cur_class_prob, cur_prob, replacement, cost = best
                seg.commit(i, replacement)
                spent += cost
                edits.append(EditRecord(i, token, replacement, cur_class_prob))
                if _label_of(cur_prob) == goal.target_label:
                    return _finalize(doc_id, seg, text, True, victim, edits, pre_label, cur_prob, p0, goal, kind)
    except _BudgetExhausted:
        pass
    success = _label_of(cur_prob) == goal.target_label
    return _finalize(doc_id, seg, text, success, victim, edits, pre_label, cur_prob, p0, goal, kind)


def deepwordbug(victim_fn, doc_id: str, text: str, goal: AttackGoal, config: AttackConfig) -> AttackResult:
    """Greedy character-edit attack under a total Levenshtein budget.

    Stopwords and tokens shorter than 3 characters are never edited; an edit
    is committed only if it strictly lowers the current-class probability and
    fits the remaining budget.
    """

    def candidates(token, remaining, _seg, _idx):
        if len(token) < 3:
            return
        for cand in char_edit_candidates(token):
            cost = levenshtein(token, cand)
            if cost <= remaining:
                yield cand, cost

    return _greedy_attack(victim_fn, doc_id, text, goal, config, candidates, "dwb")


class WordEmbeddingIndex:
    """Cosine nearest-neighbor lookup over a word embedding vocabulary."""

    def __init__(self, table: EmbeddingTable):
        self.words = [w.lower() for w in table.ids]
        self.index = {}
        for i, w in enumerate(self.words):
            self.index.setdefault(w, i)
        norms = np.linalg.norm(table.vectors, axis=1)
        norms[norms == 0.0] = 1.0
        self.unit = table.vectors / norms[:, None]

    def __contains__(self, word: str) -> bool:
        return word.lower() in self.index

    def vector(self, word: str) -> np.ndarray:
        i = self.index.get(word.lower())
        if i is None:
            raise ToolkitError(f"word {word!r} not in embedding vocabulary")
        return self.unit[i]

    def neighbors(self, word: str, max_candidates: int, min_cos: float) -> list[tuple[str, float]]:
        """Top neighbors by cosine, excluding the word itself, ties by vocabulary order."""
        i = self.index.get(word.lower())
        if i is None:
            return []
        sims = self.unit @ self.unit[i]
        order = np.argsort(-sims, kind="stable")
        out = []
        seen = {self.words[i]}
        for j in order:
            if len(out) >= max_candidates:
                break
            cos = float(sims[j])
            if cos < min_cos:
                break
            w = self.words[j]
            if w in seen:
                continue
            seen.add(w)
            out.append((w, cos))
        return out


def mean_vector_encoder(index: WordEmbeddingIndex) -> Callable[[str], np.ndarray]:
    """Document vector = mean of known word vectors (the optional TF doc constraint)."""

    def encode(text: str) -> np.ndarray:
        vecs = [index.unit[index.index[w.lower()]] for w in WORD_RE.findall(text) if w.lower() in index.index]
        if not vecs:
            return np.zeros(index.unit.shape[1])
        return np.mean(vecs, axis=0)

    return encode


def _cos(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(a @ b / (na * nb))


def _match_case(template: str, word: str) -> str:
    if template.isupper() and len(template) > 1:
        return word.upper()
    if template[:1].isupper():
        return word.capitalize()
    return word


def textfooler(
    victim_fn,
    doc_id: str,
    text: str,
    goal: AttackGoal,
    config: AttackConfig,
    word_embeddings: WordEmbeddingIndex,
    rules=None,
    doc_encoder: Callable[[str], np.ndarray] | None = None,
) -> AttackResult:
    """Greedy synonym-substitution attack.

    Candidates are embedding nearest neighbors with cosine >= min_word_cos,
    the same coarse POS as the original word, and not stopwords; words absent
    from the vocabulary are skipped.  If doc_encoder is given, candidate
    documents must stay within min_doc_cos of the original document vector.
    """
    if rules is None:
        from .textproc import default_rules

        rules = default_rules()
    orig_doc_vec = doc_encoder(text) if doc_encoder is not None else None

    def candidates(token, _remaining, seg, idx):
        lower = token.lower()
        if lower not in word_embeddings:
            return
        want_pos = pos_tag(lower, rules)
        for word, _cos_val in word_embeddings.neighbors(
            lower, config.max_candidates_per_word, config.min_word_cos
        ):
            if word in config.stopwords or word == lower:
                continue
            if pos_tag(word, rules) != want_pos:
                continue
            replacement = _match_case(token, word)
            if doc_encoder is not None and orig_doc_vec is not None:
                min_doc_cos = 0.7 if config.min_doc_cos is None else config.min_doc_cos
                cand_vec = doc_encoder(seg.text_with_replacement(idx, replacement))
                if _cos(orig_doc_vec, cand_vec) < min_doc_cos:
                    continue
            yield replacement, 0

    return _greedy_attack(victim_fn, doc_id, text, goal, config, candidates, "tf")


def goal_for_label(label: str) -> AttackGoal:
    """Machine docs get type2 (pass as human), human docs type1 (flag as machine)."""
    if label == "machine":
        return AttackGoal("type2")
    if label == "human":
        return AttackGoal("type1")
    raise ToolkitError(f"cannot derive attack goal from label {label!r}")


def run_campaign(
    victim_fn,
    docs,
    config: AttackConfig,
    kind: str,
    word_embeddings: WordEmbeddingIndex | None = None,
    rules=None,
    doc_encoder=None,
) -> tuple[list[AttackResult], dict]:
    """Attack every labeled document; success rate is over attackable docs only.

    A doc is attackable when the victim initially classifies it correctly
    (its prediction differs from the goal target).  Post-attack accuracy uses
    perturbed text for attacked docs and original text for skipped ones.
    """
    if kind not in ("dwb", "tf"):
        raise ToolkitError(f"unknown attack kind {kind!r}")
    if kind == "tf" and word_embeddings is None:
        raise ToolkitError("textfooler requires word embeddings")
    results = []
    for doc in docs:
        goal = goal_for_label(doc.label)
        if kind == "dwb":
            res = deepwordbug(victim_fn, doc.id, doc.text, goal, config)
        else:
            res = textfooler(
                victim_fn, doc.id, doc.text, goal, config, word_embeddings,
                rules=rules, doc_encoder=doc_encoder,
            )
        results.append(res)
    return results, summarize_campaign(results, docs, kind)


def summarize_campaign(results, docs, kind: str) -> dict:
    n = len(results)
    attackable = [r for r in results if r.status != "skipped-already-target"]
    successes = sum(1 for r in attackable if r.success)
    flags = []
    if not attackable:
        rate = 0.0
        flags.append("no-attackable")
    else:
        rate = successes / len(attackable)
    pre_correct = sum(1 for r, d in zip(results, docs) if r.pre_label == d.label)
    post_correct = sum(1 for r, d in zip(results, docs) if r.post_label == d.label)
    return {
        "kind": kind,
        "n_docs": n,
        "n_attackable": len(attackable),
        "n_success": successes,
        "success_rate": rate,
        "pre_attack_accuracy": pre_correct / n if n else 0.0,
        "post_attack_accuracy": post_correct / n if n else 0.0,
        "total_queries": sum(r.queries_used for r in results),
        "flags": flags,
    }


def write_results_jsonl(path: str, results) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for r in results:
            fh.write(json.dumps(r.to_dict(), sort_keys=True) + "\n")
