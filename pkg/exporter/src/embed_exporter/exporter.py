"""Corpus reading, sentence splitting, encoding, and embedding-file writing."""

from __future__ import annotations

import json
import re
import struct
from dataclasses import dataclass

import numpy as np

from . import ExportError

_BINARY_MAGIC = b"EMBV1"
_SENT_END = re.compile(r"[.!?]")
# Mirrors the toolkit's splitter closely enough for shared fixtures; edge-case
# divergence (exotic abbreviations, quotes) is documented rather than chased.
_ABBREVIATIONS = {
    "mr.", "mrs.", "ms.", "dr.", "prof.", "sr.", "jr.", "st.", "mt.",
    "u.s.", "u.k.", "u.n.", "e.g.", "i.e.", "etc.", "vs.", "inc.", "ltd.",
    "co.", "corp.", "fig.", "vol.", "a.m.", "p.m.",
}


@dataclass(frozen=True)
class ExportJob:
    input_path: str
    encoder: str  # model name or local path resolvable by sentence-transformers
    granularity: str = "document"  # or "sentence"
    output_path: str = "vectors.tsv"
    batch_size: int = 32
    output_format: str = "tsv"  # or "binary"

    def __post_init__(self):
        if self.granularity not in ("document", "sentence"):
            raise ExportError(f"unknown granularity {self.granularity!r}")
        if self.output_format not in ("tsv", "binary"):
            raise ExportError(f"unknown output format {self.output_format!r}")
        if self.batch_size < 1:
            raise ExportError("batch size must be positive")


def read_corpus(path: str) -> list[tuple[str, str]]:
    """(id, text) pairs from corpus JSONL; ids default to <filename>:<line>."""
    import os

    name = os.path.basename(path)
    units = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ExportError(f"{path}: line {lineno}: malformed JSON ({e.msg})") from e
            if not isinstance(obj, dict) or "text" not in obj:
                raise ExportError(f"{path}: line {lineno}: missing field text")
            units.append((str(obj.get("id", f"{name}:{lineno}")), obj["text"]))
    return units


def split_sentences(text: str) -> list[str]:
    """Sentence spans: . ! ? followed by whitespace and a capital (or end)."""
    out = []
    for para in re.split(r"\n\s*\n", text):
        start = 0
        i = 0
        while i < len(para):
            if para[i] in ".!?":
                j = i
                while j + 1 < len(para) and para[j + 1] in ".!?":
                    j += 1
                k = i
                while k > start and not para[k - 1].isspace():
                    k -= 1
                chunk = para[k : j + 1].lower()
                is_abbrev = para[i] == "." and (
                    chunk in _ABBREVIATIONS or re.fullmatch(r"[^\W\d_]\.", chunk)
                )
                if not is_abbrev:
                    m = j + 1
                    while m < len(para) and para[m].isspace():
                        m += 1
                    if m == len(para) or (m > j + 1 and para[m].isupper()):
                        span = para[start : j + 1].strip()
                        if span:
                            out.append(span)
                        start = m
                        i = m
                        continue
                i = j + 1
            else:
                i += 1
        tail = para[start:].strip()
        if tail:
            out.append(tail)
    return out


def expand_units(docs: list[tuple[str, str]], granularity: str) -> list[tuple[str, str]]:
    if granularity == "document":
        return docs
    units = []
    for doc_id, text in docs:
        for idx, sentence in enumerate(split_sentences(text)):
            units.append((f"{doc_id}#{idx}", sentence))
    return units


def load_encoder(name_or_path: str):
    from sentence_transformers import SentenceTransformer

    try:
        return SentenceTransformer(name_or_path)
    except Exception as e:  # model missing, bad path, no network, ...
        raise ExportError(f"cannot load encoder {name_or_path!r}: {e}") from e


def encode_units(model, units: list[tuple[str, str]], batch_size: int) -> np.ndarray:
    texts = [t for _, t in units]
    vectors = model.encode(
        texts,
        batch_size=batch_size,
        convert_to_numpy=True,
        show_progress_bar=False,
    )
    return np.asarray(vectors, dtype=np.float32)


def write_tsv(path: str, ids: list[str], vectors: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for unit_id, vec in zip(ids, vectors):
            fh.write(unit_id + "\t" + "\t".join(repr(float(v)) for v in vec) + "\n")


def write_binary(path: str, ids: list[str], vectors: np.ndarray) -> None:
    arr = np.ascontiguousarray(vectors, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(_BINARY_MAGIC)
        fh.write(struct.pack("<II", arr.shape[0], arr.shape[1]))
        fh.write(arr.tobytes())
        for unit_id in ids:
            raw = unit_id.encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)


def run_export(job: ExportJob, model=None) -> int:
    """Execute the job; returns the number of exported rows."""
    docs = read_corpus(job.input_path)
    units = expand_units(docs, job.granularity)
    if not units:
        raise ExportError(f"{job.input_path}: no units to encode")
    ids = [u for u, _ in units]
    if len(set(ids)) != len(ids):
        raise ExportError("duplicate unit ids in corpus")
    if model is None:
        model = load_encoder(job.encoder)
    vectors = encode_units(model, units, job.batch_size)
    if job.output_format == "tsv":
        write_tsv(job.output_path, ids, vectors)
    else:
        write_binary(job.output_path, ids, vectors)
    return len(ids)
