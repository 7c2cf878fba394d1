"""Feature vector storage: embedding ingest, standardization, concatenation.

Embedding files come in two interchangeable formats:

* TSV: one row per vector, ``id TAB v1 TAB v2 ...`` (UTF-8).
* Binary: magic ``EMBV1``, u32 row count, u32 dimension, little-endian f32
  vectors row-major, then an id table of (u32 byte length, UTF-8 bytes) per row.

Standardization removes the per-feature mean and scales to unit variance
(population variance, i.e. divide by n); zero-variance coordinates pass
through as 0.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import ToolkitError

_BINARY_MAGIC = b"EMBV1"


@dataclass(frozen=True)
class EmbeddingTable:
    """id-addressable matrix of fixed-dimension vectors."""

    ids: tuple[str, ...]
    vectors: np.ndarray  # shape (n, dim), float64
    schema_id: str

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._index()

    def _index(self) -> dict[str, int]:
        if not hasattr(self, "_idx"):
            object.__setattr__(self, "_idx", {d: i for i, d in enumerate(self.ids)})
        return self._idx

    def get(self, doc_id: str) -> np.ndarray:
        idx = self._index().get(doc_id)
        if idx is None:
            raise ToolkitError(f"no embedding for id {doc_id!r}")
        return self.vectors[idx]


def load_embeddings(path: str) -> EmbeddingTable:
    """Load an embedding file, auto-detecting TSV vs binary by magic bytes."""
    with open(path, "rb") as fh:
        head = fh.read(len(_BINARY_MAGIC))
    if head == _BINARY_MAGIC:
        return _load_binary(path)
    return _load_tsv(path)


def _check_new_id(ids_seen: dict, doc_id: str, where: str):
    if doc_id in ids_seen:
        raise ToolkitError(f"{where}: duplicate id {doc_id!r}")
    ids_seen[doc_id] = True


def _load_tsv(path: str) -> EmbeddingTable:
    ids: list[str] = []
    rows: list[list[float]] = []
    seen: dict = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) < 2:
                raise ToolkitError(f"{path}: line {lineno}: expected id and values")
            doc_id = parts[0]
            _check_new_id(seen, doc_id, f"{path}: line {lineno}")
            try:
                values = [float(v) for v in parts[1:]]
            except ValueError as e:
                raise ToolkitError(f"{path}: line {lineno}: bad float") from e
            if dim is None:
                dim = len(values)
            elif len(values) != dim:
                raise ToolkitError(f"{path}: dimension mismatch at line {lineno}")
            ids.append(doc_id)
            rows.append(values)
    matrix = np.asarray(rows, dtype=np.float64) if rows else np.zeros((0, 0))
    if matrix.size and not np.all(np.isfinite(matrix)):
        raise ToolkitError(f"{path}: non-finite embedding value")
    return EmbeddingTable(ids=tuple(ids), vectors=matrix, schema_id=f"neural{dim or 0}")


def _load_binary(path: str) -> EmbeddingTable:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[: len(_BINARY_MAGIC)] != _BINARY_MAGIC:
        raise ToolkitError(f"{path}: bad magic")
    off = len(_BINARY_MAGIC)
    count, dim = struct.unpack_from("<II", data, off)
    off += 8
    need = count * dim * 4
    if len(data) < off + need:
        raise ToolkitError(f"{path}: truncated vector block")
    matrix = np.frombuffer(data, dtype="<f4", count=count * dim, offset=off).astype(np.float64)
    matrix = matrix.reshape(count, dim)
    off += need
    ids: list[str] = []
    seen: dict = {}
    for row in range(count):
        if len(data) < off + 4:
            raise ToolkitError(f"{path}: truncated id table")
        (length,) = struct.unpack_from("<I", data, off)
        off += 4
        doc_id = data[off : off + length].decode("utf-8")
        off += length
        _check_new_id(seen, doc_id, f"{path}: id row {row}")
        ids.append(doc_id)
    return EmbeddingTable(ids=tuple(ids), vectors=matrix, schema_id=f"neural{dim}")


def write_embeddings_tsv(path: str, ids, vectors) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for doc_id, vec in zip(ids, vectors):
            fh.write(doc_id + "\t" + "\t".join(repr(float(v)) for v in vec) + "\n")


def write_embeddings_binary(path: str, ids, vectors) -> None:
    arr = np.asarray(vectors, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(_BINARY_MAGIC)
        fh.write(struct.pack("<II", arr.shape[0], arr.shape[1]))
        fh.write(arr.tobytes())
        for doc_id in ids:
            raw = doc_id.encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)


@dataclass(frozen=True)
class Standardizer:
    means: np.ndarray
    stds: np.ndarray  # population std; 0 entries are pass-through coordinates
    schema_id: str

    @property
    def dim(self) -> int:
        return self.means.shape[0]


def fit_standardizer(vectors: np.ndarray, schema_id: str) -> Standardizer:
    """Per-coordinate mean and population standard deviation (divide by n)."""
    X = np.asarray(vectors, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ToolkitError("standardizer needs at least 2 vectors")
    return Standardizer(means=X.mean(axis=0), stds=X.std(axis=0), schema_id=schema_id)


def transform(std: Standardizer, v: np.ndarray, schema_id: str | None = None) -> np.ndarray:
    """(x - mean) / std per coordinate; zero-variance coordinates map to 0."""
    if schema_id is not None and schema_id != std.schema_id:
        raise ToolkitError(f"schema mismatch: {schema_id!r} vs {std.schema_id!r}")
    x = np.asarray(v, dtype=np.float64)
    if x.shape[-1] != std.dim:
        raise ToolkitError(f"schema mismatch: got {x.shape[-1]} features, expected {std.dim}")
    safe = np.where(std.stds == 0.0, 1.0, std.stds)
    out = (x - std.means) / safe
    return np.where(std.stds == 0.0, 0.0, out)


def concat(a: np.ndarray, b: np.ndarray, schema_a: str, schema_b: str) -> tuple[np.ndarray, str]:
    """Ensemble by feature concatenation; schema id records the order."""
    if len(b) == 0:
        return np.asarray(a, dtype=np.float64), schema_a
    if len(a) == 0:
        return np.asarray(b, dtype=np.float64), schema_b
    merged = np.concatenate([np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)])
    return merged, f"{schema_a}+{schema_b}"


# ---------------------------------------------------------------------------
# Feature CSV (the featurize -> train interchange format)
# ---------------------------------------------------------------------------

def write_features_csv(path: str, ids, labels, names, matrix) -> None:
    """Rows of id, label, features; header names the schema."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("id,label," + ",".join(names) + "\n")
        for doc_id, label, row in zip(ids, labels, matrix):
            safe_id = str(doc_id).replace(",", "_")
            fh.write(f"{safe_id},{label or ''}," + ",".join(repr(float(v)) for v in row) + "\n")


def read_features_csv(path: str):
    """Returns (ids, labels, feature_names, matrix)."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split(",")
        if header[:2] != ["id", "label"]:
            raise ToolkitError(f"{path}: expected header starting with id,label")
        names = tuple(header[2:])
        ids, labels, rows = [], [], []
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(names) + 2:
                raise ToolkitError(f"{path}: line {lineno}: expected {len(names) + 2} fields")
            ids.append(parts[0])
            labels.append(parts[1] or None)
            try:
                rows.append([float(v) for v in parts[2:]])
            except ValueError as e:
                raise ToolkitError(f"{path}: line {lineno}: bad float") from e
    matrix = np.asarray(rows, dtype=np.float64) if rows else np.zeros((0, len(names)))
    return ids, labels, names, matrix
