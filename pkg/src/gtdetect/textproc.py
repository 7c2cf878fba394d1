"""Deterministic linguistic preprocessing.

Everything here is pure and rule-driven: word tokenization, sentence and
paragraph segmentation, a table-based English lemmatizer (exception list plus
ordered suffix rules), a syllable heuristic, a coarse POS lookup, and
Levenshtein distance.  The rule tables ship as TSV/text data files so they
can be extended without code changes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from . import ToolkitError

# Word tokens: alphanumeric runs (no underscore) with internal apostrophes.
WORD_RE = re.compile(r"[^\W_]+(?:['’][^\W_]+)*")
_PARA_RE = re.compile(r"\n\s*\n")
_VOWELS = "aeiouy"

POS_TAGS = ("noun", "verb", "adj", "adv", "other")


@dataclass(frozen=True)
class LemmaRules:
    """Lemmatizer tables: exceptions beat suffix rules, first matching rule wins."""

    exceptions: dict[str, str]
    suffix_rules: tuple[tuple[str, str], ...]
    pos_lexicon: dict[str, str]
    abbreviations: frozenset[str]


@dataclass(frozen=True)
class ProcessedDoc:
    """Tokenized view of one document.

    sentences are [start, end) ranges over token indices; paragraphs are
    [start, end) ranges over sentence indices.  Both partition their index
    space in order.  lemmas run parallel to tokens.
    """

    tokens: tuple[str, ...]
    sentences: tuple[tuple[int, int], ...]
    paragraphs: tuple[tuple[int, int], ...]
    lemmas: tuple[str, ...]

    @property
    def n_tokens(self) -> int:
        return len(self.tokens)

    def sentence_lemmas(self, i: int):
        s, e = self.sentences[i]
        return self.lemmas[s:e]

    def paragraph_lemmas(self, i: int):
        s, e = self.paragraphs[i]
        out: list[str] = []
        for j in range(s, e):
            out.extend(self.sentence_lemmas(j))
        return tuple(out)


def _read_data_text(name: str) -> str:
    return resources.files("gtdetect.data").joinpath(name).read_text(encoding="utf-8")


def _parse_tsv_pairs(text: str, what: str, allow_empty_second: bool = False) -> list[tuple[str, str]]:
    pairs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) == 1 and allow_empty_second:
            parts = [parts[0], ""]
        if len(parts) != 2:
            raise ToolkitError(f"{what}: line {lineno}: expected 2 tab-separated fields")
        pairs.append((parts[0].strip().lower(), parts[1].strip().lower()))
    return pairs


def load_rules(
    exceptions_path: str | None = None,
    suffix_rules_path: str | None = None,
    pos_lexicon_path: str | None = None,
    abbreviations_path: str | None = None,
) -> LemmaRules:
    """Load lemmatizer tables, falling back to the packaged defaults per file."""

    def read(path, default_name):
        if path is None:
            return _read_data_text(default_name)
        with open(path, encoding="utf-8") as fh:
            return fh.read()

    exceptions = dict(_parse_tsv_pairs(read(exceptions_path, "lemma_exceptions.tsv"), "lemma exceptions"))
    # A rule line with no second field strips the suffix (empty replacement).
    suffix_rules = tuple(
        _parse_tsv_pairs(read(suffix_rules_path, "suffix_rules.tsv"), "suffix rules", allow_empty_second=True)
    )
    pos_pairs = _parse_tsv_pairs(read(pos_lexicon_path, "pos_lexicon.tsv"), "pos lexicon")
    for word, tag in pos_pairs:
        if tag not in POS_TAGS:
            raise ToolkitError(f"pos lexicon: unknown tag {tag!r} for {word!r}")
    abbrevs = frozenset(
        line.strip().lower()
        for line in read(abbreviations_path, "abbreviations.txt").splitlines()
        if line.strip() and not line.startswith("#")
    )
    return LemmaRules(
        exceptions=exceptions,
        suffix_rules=suffix_rules,
        pos_lexicon=dict(pos_pairs),
        abbreviations=abbrevs,
    )


@lru_cache(maxsize=1)
def default_rules() -> LemmaRules:
    return load_rules()


def load_stopwords(path: str | None = None) -> frozenset[str]:
    text = _read_data_text("stopwords.txt") if path is None else open(path, encoding="utf-8").read()
    return frozenset(
        line.strip().lower() for line in text.splitlines() if line.strip() and not line.startswith("#")
    )


def tokenize(text: str) -> list[str]:
    """Word tokens of a text span, surrounding apostrophes stripped."""
    out = []
    for m in WORD_RE.finditer(text):
        tok = m.group().strip("'’")
        if tok:
            out.append(tok)
    return out


def lemmatize_token(token: str, rules: LemmaRules) -> str:
    """Exception table, then first matching suffix rule, then identity."""
    t = token.lower()
    hit = rules.exceptions.get(t)
    if hit is not None:
        return hit
    for suffix, repl in rules.suffix_rules:
        if t.endswith(suffix) and len(t) > len(suffix) and len(t) - len(suffix) + len(repl) >= 2:
            return t[: len(t) - len(suffix)] + repl
    return t


def _sentence_spans(paragraph: str, abbreviations: frozenset[str]) -> list[str]:
    """Split on . ! ? followed by whitespace + capital (or end), honoring abbreviations."""
    spans = []
    start = 0
    i = 0
    n = len(paragraph)
    while i < n:
        ch = paragraph[i]
        if ch in ".!?":
            j = i
            while j + 1 < n and paragraph[j + 1] in ".!?":
                j += 1  # treat runs like "..." or "?!" as one terminator
            # Trailing chunk of the current word including its dots, e.g. "u.s."
            k = i
            while k > start and not paragraph[k - 1].isspace():
                k -= 1
            chunk = paragraph[k : j + 1].lower()
            is_abbrev = ch == "." and (
                chunk in abbreviations or re.fullmatch(r"[^\W\d_]\.", chunk) is not None
            )
            if not is_abbrev:
                m = j + 1
                while m < n and paragraph[m].isspace():
                    m += 1
                if m == n or (m > j + 1 and paragraph[m].isupper()):
                    spans.append(paragraph[start : j + 1])
                    start = m
                    i = m
                    continue
            i = j + 1
        else:
            i += 1
    if start < n:
        spans.append(paragraph[start:])
    return spans


def process(text: str, rules: LemmaRules | None = None) -> ProcessedDoc:
    """Full preprocessing pipeline: paragraphs -> sentences -> tokens -> lemmas."""
    if rules is None:
        rules = default_rules()
    tokens: list[str] = []
    sentences: list[tuple[int, int]] = []
    paragraphs: list[tuple[int, int]] = []
    for para in _PARA_RE.split(text):
        first_sentence = len(sentences)
        for span in _sentence_spans(para, rules.abbreviations):
            toks = tokenize(span)
            if toks:
                sentences.append((len(tokens), len(tokens) + len(toks)))
                tokens.extend(toks)
        if len(sentences) > first_sentence:
            paragraphs.append((first_sentence, len(sentences)))
    if not tokens:
        raise ToolkitError("no tokens")
    lemmas = tuple(lemmatize_token(t, rules) for t in tokens)
    return ProcessedDoc(
        tokens=tuple(tokens),
        sentences=tuple(sentences),
        paragraphs=tuple(paragraphs),
        lemmas=lemmas,
    )


def count_syllables(word: str) -> int:
    """Vowel-group syllable heuristic.

    Count runs of aeiouy over the letters of the word, subtract one for a
    terminal silent "e" (unless the word ends in consonant + "le"), floor 1.
    """
    w = "".join(c for c in word.lower() if c.isalpha())
    if not w:
        return 1
    groups = len(re.findall(r"[aeiouy]+", w))
    if w.endswith("e") and not (
        len(w) >= 3 and w.endswith("le") and w[-3] not in _VOWELS
    ):
        groups -= 1
    return max(1, groups)


def levenshtein(a: str, b: str) -> int:
    """Minimal insert/delete/substitute edits between character sequences."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def pos_tag(token: str, rules: LemmaRules) -> str:
    """Coarse POS tag via lexicon lookup on the lower-cased token; unknown -> "other"."""
    return rules.pos_lexicon.get(token.lower(), "other")
