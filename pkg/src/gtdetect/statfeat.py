"""Statistical stylometry features.

The 10-feature schema, in fixed order: Zipf regression slope / MSE / R^2 over
log-log lemma frequency versus rank, Gunning-Fog and Flesch fluency indices,
per-token frequencies of cliches, idioms, and archaisms, and adjacent-unit
consistency at sentence and paragraph level.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import NamedTuple

from . import ToolkitError
from .corpus import PhraseList
from .textproc import LemmaRules, ProcessedDoc, count_syllables, lemmatize_token

STAT_FEATURE_NAMES = (
    "zipf_slope",
    "zipf_mse",
    "zipf_r2",
    "gunning_fog",
    "flesch",
    "freq_cliche",
    "freq_idiom",
    "freq_archaism",
    "consist_sentence",
    "consist_paragraph",
)
STAT_SCHEMA_ID = "stat10"


@dataclass(frozen=True)
class StatFeatures:
    zipf_slope: float
    zipf_mse: float
    zipf_r2: float
    gunning_fog: float
    flesch: float
    freq_cliche: float
    freq_idiom: float
    freq_archaism: float
    consist_sentence: float
    consist_paragraph: float

    def to_vector(self) -> list[float]:
        return [getattr(self, name) for name in STAT_FEATURE_NAMES]


class ZipfFit(NamedTuple):
    slope: float
    intercept: float
    mse: float
    r2: float


def ranked_lemma_counts(doc: ProcessedDoc) -> list[tuple[str, int]]:
    """Distinct lemmas by descending count, ties broken lexicographically."""
    counts = Counter(doc.lemmas)
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))


def zipf_fit(doc: ProcessedDoc) -> ZipfFit:
    """Least squares on (ln rank, ln count) over distinct lemmas.

    The MSE is the mean squared residual over the n distinct lemmas; counts
    are raw (normalizing shifts every y equally, leaving slope, MSE, and R^2
    unchanged).  Natural logarithms throughout.  R^2 is defined as 1 on a
    zero-variance target.
    """
    ranked = ranked_lemma_counts(doc)
    n = len(ranked)
    if n < 2:
        raise ToolkitError("degenerate frequency distribution")
    xs = [math.log(r) for r in range(1, n + 1)]
    ys = [math.log(c) for _, c in ranked]
    x_mean = sum(xs) / n
    y_mean = sum(ys) / n
    sxx = sum((x - x_mean) ** 2 for x in xs)
    sxy = sum((x - x_mean) * (y - y_mean) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = y_mean - slope * x_mean
    residuals = [y - (slope * x + intercept) for x, y in zip(xs, ys)]
    ss_res = sum(r * r for r in residuals)
    ss_tot = sum((y - y_mean) ** 2 for y in ys)
    mse = ss_res / n
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return ZipfFit(slope=slope, intercept=intercept, mse=mse, r2=r2)


def zipf_features(doc: ProcessedDoc) -> tuple[float, float, float]:
    fit = zipf_fit(doc)
    return fit.slope, fit.mse, fit.r2


def zipf_theoretical(k: int, n_words: int) -> float:
    """Ideal Zipf normalized frequency of rank k out of n_words: (1/k) / H(n_words)."""
    if not 1 <= k <= n_words:
        raise ToolkitError(f"rank {k} out of range 1..{n_words}")
    harmonic = sum(1.0 / i for i in range(1, n_words + 1))
    return (1.0 / k) / harmonic


def fluency(doc: ProcessedDoc) -> tuple[float, float]:
    """Gunning-Fog grade level and Flesch reading ease.

    fog    = 0.4 * (words/sentences + 100 * complex_words/words),
             complex word = 3+ syllables
    flesch = 206.835 - 1.015 * words/sentences - 84.6 * syllables/words
    """
    words = doc.n_tokens
    sents = len(doc.sentences)
    syllables = [count_syllables(t) for t in doc.tokens]
    n_complex = sum(1 for s in syllables if s >= 3)
    words_per_sent = words / sents
    fog = 0.4 * (words_per_sent + 100.0 * n_complex / words)
    flesch = 206.835 - 1.015 * words_per_sent - 84.6 * sum(syllables) / words
    return fog, flesch


def _lemmatized_phrases(plist: PhraseList, rules: LemmaRules) -> list[tuple[str, ...]]:
    out = []
    seen = set()
    for phrase in plist.phrases:
        lem = tuple(lemmatize_token(tok, rules) for tok in phrase)
        if lem not in seen:
            seen.add(lem)
            out.append(lem)
    # Longest first so greedy matching prefers maximal phrases.
    out.sort(key=lambda p: (-len(p), p))
    return out


def _count_matches(lemmas: tuple[str, ...], phrases: list[tuple[str, ...]]) -> int:
    """Non-overlapping longest-first matches of phrases against the lemma stream."""
    if not phrases:
        return 0
    n = len(lemmas)
    count = 0
    i = 0
    while i < n:
        for phrase in phrases:
            k = len(phrase)
            if i + k <= n and lemmas[i : i + k] == phrase:
                count += 1
                i += k
                break
        else:
            i += 1
    return count


def phrasal_frequencies(
    doc: ProcessedDoc,
    cliches: PhraseList,
    idioms: PhraseList,
    archaisms: PhraseList,
    rules: LemmaRules,
) -> tuple[float, float, float]:
    """Matches-per-token for each phrase kind, matched on the lemma stream."""
    out = []
    for plist in (cliches, idioms, archaisms):
        matches = _count_matches(doc.lemmas, _lemmatized_phrases(plist, rules))
        out.append(matches / doc.n_tokens)
    return tuple(out)


def _cosine(a: Counter, b: Counter) -> float:
    dot = sum(v * b.get(k, 0) for k, v in a.items())
    na = math.sqrt(sum(v * v for v in a.values()))
    nb = math.sqrt(sum(v * v for v in b.values()))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot / (na * nb)


def consistency(doc: ProcessedDoc) -> tuple[float, float]:
    """Mean cosine of bag-of-lemma vectors over adjacent sentences / paragraphs.

    0.0 when fewer than two units exist.
    """

    def mean_adjacent(bags: list[Counter]) -> float:
        if len(bags) < 2:
            return 0.0
        sims = [_cosine(bags[i], bags[i + 1]) for i in range(len(bags) - 1)]
        return sum(sims) / len(sims)

    sent_bags = [Counter(doc.sentence_lemmas(i)) for i in range(len(doc.sentences))]
    para_bags = [Counter(doc.paragraph_lemmas(i)) for i in range(len(doc.paragraphs))]
    return mean_adjacent(sent_bags), mean_adjacent(para_bags)


def featurize_stat(
    doc: ProcessedDoc,
    cliches: PhraseList,
    idioms: PhraseList,
    archaisms: PhraseList,
    rules: LemmaRules,
) -> StatFeatures:
    """Assemble the full 10-feature vector in schema order."""
    slope, mse, r2 = zipf_features(doc)
    fog, flesch = fluency(doc)
    f_cliche, f_idiom, f_archaism = phrasal_frequencies(doc, cliches, idioms, archaisms, rules)
    c_sent, c_para = consistency(doc)
    return StatFeatures(
        zipf_slope=slope,
        zipf_mse=mse,
        zipf_r2=r2,
        gunning_fog=fog,
        flesch=flesch,
        freq_cliche=f_cliche,
        freq_idiom=f_idiom,
        freq_archaism=f_archaism,
        consist_sentence=c_sent,
        consist_paragraph=c_para,
    )
