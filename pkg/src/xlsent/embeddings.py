"""Pre-trained word vectors in GloVe text format."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .textproc import Vocabulary


class EmbeddingError(ValueError):
    pass


@dataclass
class EmbeddingTable:
    vectors: dict[str, np.ndarray]
    dim: int

    def __len__(self) -> int:
        return len(self.vectors)

    def __contains__(self, word: str) -> bool:
        return word in self.vectors

    def __getitem__(self, word: str) -> np.ndarray:
        return self.vectors[word]


@dataclass(frozen=True)
class EmbeddingMatrix:
    matrix: np.ndarray
    coverage: float

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def content_hash(self) -> str:
        m = np.ascontiguousarray(self.matrix, dtype="<f4")
        h = hashlib.sha256(f"{m.shape[0]}x{m.shape[1]}".encode())
        h.update(m.tobytes())
        return h.hexdigest()


def load_glove(path, dim: int = 100) -> EmbeddingTable:
    """Read ``word v1 ... v_dim`` lines; the first occurrence of a word wins."""
    if dim < 1:
        raise EmbeddingError("dim must be >= 1")
    vectors: dict[str, np.ndarray] = {}
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            parts = line.rstrip(" ").split(" ")
            if len(parts) != dim + 1:
                raise EmbeddingError(f"{path}:{lineno}: expected {dim} values, found {len(parts) - 1}")
            try:
                values = [float(v) for v in parts[1:]]
            except ValueError:
                raise EmbeddingError(f"{path}:{lineno}: non-numeric vector component") from None
            if not all(math.isfinite(v) for v in values):
                raise EmbeddingError(f"{path}:{lineno}: non-finite vector component")
            word = parts[0].lower()
            if word not in vectors:
                vectors[word] = np.asarray(values, dtype=np.float64)
    return EmbeddingTable(vectors, dim)


def save_glove(table: EmbeddingTable, path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for word, vec in table.vectors.items():
            fh.write(word + " " + " ".join(f"{v:.6f}" for v in vec) + "\n")


def project(vocab: Vocabulary, table: EmbeddingTable, dim: int | None = None) -> EmbeddingMatrix:
    """Align table vectors to vocabulary rows; missing words and PAD/UNK get zeros."""
    if dim is not None and table.dim != dim:
        raise EmbeddingError(f"embedding dim {table.dim} does not match model dim {dim}")
    matrix = np.zeros((len(vocab), table.dim), dtype=np.float32)
    words = vocab.words
    hits = 0
    for i, word in enumerate(words, start=2):
        vec = table.vectors.get(word)
        if vec is not None:
            matrix[i] = vec
            hits += 1
    matrix.setflags(write=False)
    coverage = hits / len(words) if words else 0.0
    return EmbeddingMatrix(matrix, coverage)
