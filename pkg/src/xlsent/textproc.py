"""Tokenization, vocabularies and fixed-length sequence encoding."""

from __future__ import annotations

import hashlib
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

PAD = "<pad>"
UNK = "<unk>"
PAD_INDEX = 0
UNK_INDEX = 1

# letters/digits (no underscore), optionally joined by one internal apostrophe
_TOKEN_RE = re.compile(r"[^\W_]+(?:'[^\W_]+)?")


class TextError(ValueError):
    pass


def normalize(text: str) -> str:
    text = unicodedata.normalize("NFKC", text).replace("’", "'")
    return unicodedata.normalize("NFKC", text.lower())


def tokenize(text: str) -> list[str]:
    """Split ``text`` into lowercase tokens.

    >>> tokenize("Great food, GREAT service!")
    ['great', 'food', 'great', 'service']
    >>> tokenize("don't stop")
    ["don't", 'stop']
    """
    return _TOKEN_RE.findall(normalize(text))


class Vocabulary:
    """Dense token -> index map with ``PAD`` at 0 and ``UNK`` at 1."""

    def __init__(self, tokens: Sequence[str], min_count: int = 1):
        tokens = list(tokens)
        if tokens[:2] != [PAD, UNK]:
            tokens = [PAD, UNK] + [t for t in tokens if t not in (PAD, UNK)]
        self.itos = tokens
        self.stoi = {t: i for i, t in enumerate(tokens)}
        if len(self.stoi) != len(self.itos):
            raise TextError("vocabulary tokens must be unique")
        self.min_count = min_count

    def __len__(self) -> int:
        return len(self.itos)

    def __contains__(self, token: str) -> bool:
        return token in self.stoi and self.stoi[token] > UNK_INDEX

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self.itos == other.itos

    def index(self, token: str) -> int:
        idx = self.stoi.get(token, UNK_INDEX)
        return UNK_INDEX if idx == PAD_INDEX else idx

    def as_dict(self) -> dict[str, int]:
        return dict(self.stoi)

    @property
    def words(self) -> list[str]:
        return self.itos[2:]

    def content_hash(self) -> str:
        return hashlib.sha256("\n".join(self.itos).encode("utf-8")).hexdigest()

    def save(self, path) -> None:
        Path(path).write_text("\n".join(self.itos) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        lines = Path(path).read_text(encoding="utf-8").split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        if lines[:2] != [PAD, UNK]:
            raise TextError(f"{path}: not a vocabulary file (missing {PAD}/{UNK} header)")
        return cls(lines)


def build_vocab(texts_or_datasets: Iterable, min_count: int = 1) -> Vocabulary:
    """Collect tokens with frequency >= ``min_count``.

    Accepts datasets (anything iterable over objects with a ``text`` attribute)
    or plain strings. Indices follow descending frequency, ties broken
    lexicographically.
    """
    if min_count < 1:
        raise TextError("min_count must be >= 1")
    counts: Counter = Counter()
    for item in texts_or_datasets:
        if isinstance(item, str):
            counts.update(tokenize(item))
        else:
            for review in item:
                counts.update(tokenize(review.text))
    kept = sorted((t for t, c in counts.items() if c >= min_count), key=lambda t: (-counts[t], t))
    if not kept:
        raise TextError(f"no token reaches min_count={min_count}")
    return Vocabulary([PAD, UNK] + kept, min_count=min_count)


@dataclass(frozen=True)
class EncodedSequence:
    indices: np.ndarray
    mask: np.ndarray
    true_length: int

    def __len__(self) -> int:
        return len(self.indices)


def encode(tokens: Sequence[str], vocab: Vocabulary, max_len: int = 200) -> EncodedSequence:
    """Map tokens to indices, keeping the first ``max_len`` and padding the rest."""
    if max_len < 1:
        raise TextError("max_len must be >= 1")
    if not tokens:
        raise TextError("cannot encode empty review")
    kept = list(tokens[:max_len])
    n = len(kept)
    indices = np.full(max_len, PAD_INDEX, dtype=np.int64)
    indices[:n] = [vocab.index(t) for t in kept]
    mask = np.zeros(max_len, dtype=bool)
    mask[:n] = True
    return EncodedSequence(indices, mask, n)


def encode_batch(seqs: Sequence[EncodedSequence]) -> tuple[np.ndarray, np.ndarray]:
    """Stack sequences into ``(B, T)`` index and mask arrays."""
    if not seqs:
        raise TextError("empty batch")
    lengths = {len(s) for s in seqs}
    if len(lengths) != 1:
        raise TextError(f"sequences in a batch must share max_len, got {sorted(lengths)}")
    return np.stack([s.indices for s in seqs]), np.stack([s.mask for s in seqs])


class WordList(frozenset):
    """Reference set of English words for untranslated-token detection."""

    def __new__(cls, words: Iterable[str] = ()):
        self = super().__new__(cls, (w.lower() for w in words))
        if not self:
            raise TextError("word list is empty")
        return self

    @classmethod
    def from_file(cls, path) -> "WordList":
        words = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line and not line.startswith("#"):
                    words.append(line)
        return cls(words)


def contains_non_english(tokens: Iterable[str], wordlist: WordList) -> bool:
    """True iff some purely alphabetic token is missing from ``wordlist``."""
    return any(t.isalpha() and t not in wordlist for t in tokens)


def encode_text(text: str, vocab: Vocabulary, max_len: int = 200) -> EncodedSequence:
    """Tokenize and encode; a review without any token is scored as a single UNK."""
    tokens = tokenize(text) or [UNK]
    return encode(tokens, vocab, max_len)
