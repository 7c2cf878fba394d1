"""Loading, labelling, sampling, and writing of text datasets.

Datasets are line-delimited JSON with a mandatory "text" key and optional
"id", "label" ("human" or "machine"), and "source" keys, matching the layout
of the public GPT-2 output corpus so those files drop in unmodified.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from . import ToolkitError
from .rng import Xorshift64Star

LABELS = ("human", "machine")


@dataclass(frozen=True)
class Document:
    id: str
    text: str
    label: str | None = None
    source: str = ""

    def __post_init__(self):
        if not self.text.strip():
            raise ToolkitError(f"document {self.id!r}: empty text")
        if self.label is not None and self.label not in LABELS:
            raise ToolkitError(f"document {self.id!r}: bad label {self.label!r}")


@dataclass(frozen=True)
class PhraseList:
    """Deduplicated phrase inventory of one kind (cliche, idiom, or archaism)."""

    kind: str
    phrases: tuple[tuple[str, ...], ...] = field(default_factory=tuple)

    KINDS = ("cliche", "idiom", "archaism")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ToolkitError(f"unknown phrase kind {self.kind!r}")
        if any(len(p) == 0 for p in self.phrases):
            raise ToolkitError("empty phrase in phrase list")

    def __len__(self):
        return len(self.phrases)


def load_jsonl(path: str, force_label: str | None = None) -> list[Document]:
    """Read one Document per non-blank line; ids default to "<filename>:<line>".

    force_label overrides/fills the label for every document (the public corpus
    encodes the class per-file rather than per-record).
    """
    if force_label is not None and force_label not in LABELS:
        raise ToolkitError(f"bad label {force_label!r}")
    name = os.path.basename(path)
    docs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ToolkitError(f"{path}: line {lineno}: malformed JSON ({e.msg})") from e
            if not isinstance(obj, dict) or "text" not in obj:
                raise ToolkitError(f"{path}: line {lineno}: missing field text")
            text = obj["text"]
            if not isinstance(text, str):
                raise ToolkitError(f"{path}: line {lineno}: field text is not a string")
            label = force_label if force_label is not None else obj.get("label")
            docs.append(
                Document(
                    id=str(obj.get("id", f"{name}:{lineno}")),
                    text=text,
                    label=label,
                    source=str(obj.get("source", "")),
                )
            )
    return docs


def write_jsonl(path: str, docs: list[Document]) -> None:
    """Inverse of load_jsonl; text fields round-trip bit-exactly."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for d in docs:
            obj = {"id": d.id, "text": d.text}
            if d.label is not None:
                obj["label"] = d.label
            if d.source:
                obj["source"] = d.source
            fh.write(json.dumps(obj, sort_keys=True) + "\n")


def balanced_sample(
    docs_pos: list[Document],
    docs_neg: list[Document],
    n_per_class: int,
    seed: int = 0,
) -> list[Document]:
    """Draw n_per_class docs from each list without replacement (seeded, deterministic)."""
    for name, docs in (("positive", docs_pos), ("negative", docs_neg)):
        if len(docs) < n_per_class:
            raise ToolkitError(
                f"{name} class has {len(docs)} documents, {n_per_class} requested"
            )
    rng = Xorshift64Star(seed)
    picked = [docs_pos[i] for i in rng.sample_indices(len(docs_pos), n_per_class)]
    picked += [docs_neg[i] for i in rng.sample_indices(len(docs_neg), n_per_class)]
    return picked


def load_phrase_list(path: str, kind: str) -> PhraseList:
    """One phrase per line; '#' lines ignored; lower-cased, whitespace-tokenized, deduped."""
    try:
        fh = open(path, encoding="utf-8")
    except OSError as e:
        raise ToolkitError(f"cannot read phrase list {path}: {e}") from e
    phrases: list[tuple[str, ...]] = []
    seen = set()
    with fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            toks = tuple(line.lower().split())
            if toks and toks not in seen:
                seen.add(toks)
                phrases.append(toks)
    return PhraseList(kind=kind, phrases=tuple(phrases))
