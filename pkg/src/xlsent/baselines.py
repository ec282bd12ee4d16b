"""Reference systems: majority class and the SentiWordNet sum rule."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .corpus import Label, LabeledDataset, label_distribution, require_labeled
from .reporting import round_half_up


class LexiconError(ValueError):
    pass


@dataclass(frozen=True)
class Lexicon:
    scores: dict[str, tuple[float, float]]
    source_hash: str = ""

    def __len__(self) -> int:
        return len(self.scores)

    def __contains__(self, word: str) -> bool:
        return word in self.scores

    def __getitem__(self, word: str) -> tuple[float, float]:
        return self.scores[word]

    def require_nonempty(self) -> "Lexicon":
        if not self.scores:
            raise LexiconError("empty lexicon")
        return self


def majority_accuracy(ds: LabeledDataset) -> float:
    """Accuracy (percent, 2 decimals) of always predicting the most frequent class."""
    require_labeled(ds)
    dist = label_distribution(ds)
    return round_half_up(100.0 * max(dist.positives, dist.negatives) / len(ds))


def majority_label(ds: LabeledDataset) -> Label:
    dist = label_distribution(require_labeled(ds))
    return Label.POSITIVE if dist.positives > dist.negatives else Label.NEGATIVE


def _parse_score(text: str, path, lineno: int, what: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise LexiconError(f"{path}:{lineno}: {what} {text!r} is not a number") from None
    if not 0.0 <= value <= 1.0:
        raise LexiconError(f"{path}:{lineno}: {what} {value} outside [0, 1]")
    return value


def parse_sentiwordnet(path) -> Lexicon:
    """Average (PosScore, NegScore) over every sense and POS a word appears in.

    Synset terms look like ``word#sense``; multiword terms (containing ``_``)
    are skipped since the tokenizer never produces them.
    """
    raw = Path(path).read_bytes()
    sums: dict[str, tuple[list, list]] = {}
    for lineno, line in enumerate(raw.decode("utf-8").splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 6:
            raise LexiconError(f"{path}:{lineno}: expected 6 tab-separated fields, found {len(parts)}")
        pos = _parse_score(parts[2], path, lineno, "PosScore")
        neg = _parse_score(parts[3], path, lineno, "NegScore")
        for term in parts[4].split():
            word, sep, sense = term.rpartition("#")
            if not sep or not word:
                raise LexiconError(f"{path}:{lineno}: synset term {term!r} lacks a '#sense' suffix")
            if "_" in word:
                continue
            acc = sums.setdefault(word.lower(), ([], []))
            acc[0].append(pos)
            acc[1].append(neg)
    # fsum is exactly rounded, so the means do not depend on line order
    scores = {w: (math.fsum(p) / len(p), math.fsum(n) / len(n)) for w, (p, n) in sums.items()}
    return Lexicon(scores, hashlib.sha256(raw).hexdigest())


def lexicon_sums(tokens: Iterable[str], lex: Lexicon) -> tuple[float, float]:
    lex.require_nonempty()
    pos_sum = neg_sum = 0.0
    for t in tokens:
        s = lex.scores.get(t)
        if s is not None:
            pos_sum += s[0]
            neg_sum += s[1]
    return pos_sum, neg_sum


def lexicon_label(tokens: Iterable[str], lex: Lexicon) -> Label:
    """Positive only when the positive sum strictly exceeds the negative sum."""
    pos_sum, neg_sum = lexicon_sums(tokens, lex)
    return Label.POSITIVE if pos_sum > neg_sum else Label.NEGATIVE
