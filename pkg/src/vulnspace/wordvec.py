"""Pretrained word vectors with hashed-subword fallback for unknown tokens.

Stores are loaded from the plain text ``.vec`` format (header ``count dim``,
then one ``token v1 ... v_dim`` line per word).  Out-of-vocabulary tokens
get the mean of hashed character n-gram bucket rows; a plain text load
leaves the buckets all-zero (OOV tokens then embed to zero and are dropped
by embed_doc), while the companion "VSUB" binary supplies trained buckets.

A document embedding is the unit-normalized mean of the unit-normalized
non-zero token vectors, which makes it invariant to token order and to
positive rescaling of any stored row.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import binio
from .textprep import TokenSequence

DEFAULT_BUCKET_COUNT = 2_000_000
DEFAULT_NGRAM_RANGE = (3, 6)

FNV_OFFSET = 0x811C9DC5
FNV_PRIME = 0x01000193


def fnv1a_32(data: bytes) -> int:
    """FNV-1a 32-bit hash."""
    h = FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * FNV_PRIME) & 0xFFFFFFFF
    return h


class VectorFormatError(ValueError):
    pass


@dataclass
class VectorStore:
    dim: int
    vocab: dict[str, int]
    word_matrix: np.ndarray
    bucket_count: int = DEFAULT_BUCKET_COUNT
    bucket_matrix: np.ndarray | None = None  # None means all-zero buckets
    ngram_range: tuple[int, int] = DEFAULT_NGRAM_RANGE

    def __post_init__(self):
        if self.dim <= 0:
            raise ValueError("dim must be positive")
        if self.bucket_count <= 0:
            raise ValueError("bucket_count must be positive")
        if not np.all(np.isfinite(self.word_matrix)):
            raise ValueError("word_matrix contains non-finite values")


def load_vectors(path: str | Path, limit: int | None = None) -> VectorStore:
    """Load a text-format vector file, keeping the first min(limit, count) words."""
    vocab: dict[str, int] = {}
    rows: list[np.ndarray] = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise VectorFormatError("line 1: header must be 'count dim'")
        try:
            count, dim = int(header[0]), int(header[1])
        except ValueError as exc:
            raise VectorFormatError(f"line 1: non-integer header: {exc}") from exc
        if count < 0 or dim <= 0:
            raise VectorFormatError("line 1: header values out of range")
        wanted = count if limit is None else min(limit, count)
        consumed = 0
        for line_no, line in enumerate(fh, start=2):
            if consumed >= wanted:
                break
            parts = line.rstrip("\n").split(" ")
            if len(parts) != dim + 1:
                raise VectorFormatError(
                    f"line {line_no}: expected {dim + 1} fields, got {len(parts)}")
            token = parts[0]
            try:
                vec = np.array([float(x) for x in parts[1:]], dtype=np.float32)
            except ValueError as exc:
                raise VectorFormatError(f"line {line_no}: bad float: {exc}") from exc
            consumed += 1
            if token not in vocab:
                vocab[token] = len(rows)
                rows.append(vec)
    if consumed < wanted:
        raise VectorFormatError(
            f"header declared {count} words but file has {consumed}")
    matrix = np.vstack(rows) if rows else np.zeros((0, dim), dtype=np.float32)
    return VectorStore(dim=dim, vocab=vocab, word_matrix=matrix)


def subword_hashes(store: VectorStore, token: str) -> list[int]:
    """Bucket indices for the character n-grams of "<token>".

    Enumeration order is by start position, shorter n-grams first at each
    position.
    """
    if not token:
        raise ValueError("empty token")
    wrapped = f"<{token}>"
    min_n, max_n = store.ngram_range
    indices: list[int] = []
    for start in range(len(wrapped)):
        for n in range(min_n, max_n + 1):
            if start + n > len(wrapped):
                break
            gram = wrapped[start:start + n]
            indices.append(fnv1a_32(gram.encode("utf-8")) % store.bucket_count)
    return indices


def token_vector(store: VectorStore, token: str) -> np.ndarray:
    """Stored row for in-vocabulary tokens, hashed-subword mean otherwise."""
    row = store.vocab.get(token)
    if row is not None:
        return store.word_matrix[row].astype(np.float64)
    if store.bucket_matrix is None:
        return np.zeros(store.dim)
    hashes = subword_hashes(store, token)
    return store.bucket_matrix[hashes].astype(np.float64).mean(axis=0)


@dataclass(frozen=True)
class DocEmbedding:
    vector: np.ndarray
    used_components: int


def embed_doc(store: VectorStore, seq: TokenSequence) -> DocEmbedding:
    """Unit-normalized mean of the unit-normalized non-zero token vectors."""
    survivors = []
    for token in seq.tokens:
        vec = token_vector(store, token)
        norm = np.linalg.norm(vec)
        if norm > 0.0:
            survivors.append(vec / norm)
    if not survivors:
        return DocEmbedding(np.zeros(store.dim), 0)
    mean = np.mean(survivors, axis=0)
    norm = np.linalg.norm(mean)
    if norm > 0.0:
        mean = mean / norm
    return DocEmbedding(mean, len(survivors))


def embed_corpus(store: VectorStore, sequences: list[TokenSequence]) -> np.ndarray:
    """Row-per-document embedding matrix in the given order."""
    out = np.zeros((len(sequences), store.dim))
    for i, seq in enumerate(sequences):
        out[i] = embed_doc(store, seq).vector
    return out


SUBWORD_MAGIC = "VSUB"
SUBWORD_VERSION = 1


def save_subwords(store: VectorStore, path: str | Path) -> None:
    if store.bucket_matrix is None:
        raise ValueError("store has no trained bucket matrix")
    with open(path, "wb") as fh:
        binio.write_magic(fh, SUBWORD_MAGIC, SUBWORD_VERSION)
        binio.write_u32(fh, store.ngram_range[0])
        binio.write_u32(fh, store.ngram_range[1])
        binio.write_f32_matrix(fh, store.bucket_matrix)


def load_subwords(store: VectorStore, path: str | Path) -> VectorStore:
    """Return a copy of the store with buckets from a VSUB file."""
    with open(path, "rb") as fh:
        binio.read_magic(fh, SUBWORD_MAGIC, SUBWORD_VERSION)
        min_n = binio.read_u32(fh)
        max_n = binio.read_u32(fh)
        matrix = binio.read_f32_matrix(fh)
    if matrix.shape[1] != store.dim:
        raise VectorFormatError(
            f"subword dim {matrix.shape[1]} != store dim {store.dim}")
    return VectorStore(dim=store.dim, vocab=store.vocab,
                       word_matrix=store.word_matrix,
                       bucket_count=matrix.shape[0], bucket_matrix=matrix,
                       ngram_range=(min_n, max_n))
