"""Desk-scale synthetic corpora for exercising the whole pipeline.

The generator builds an artificial English vocabulary (positive cues,
negative cues, neutral filler), a general and a domain review corpus, and
a "foreign" corpus written in a token-level pseudo-language. A bilingual
dictionary covers 90% of the foreign vocabulary; the remaining words stay
untranslated, like real machine-translation residue. It also writes frozen
word vectors in GloVe format and a SentiWordNet-style lexicon so the
baselines and the RNN can run on the same inputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Label, LabeledDataset, Review, save_jsonl
from .embeddings import EmbeddingTable, save_glove

N_POS = 50
N_NEG = 50
N_NEUTRAL = 200
# general-corpus reviews only use the first cues of each polarity
N_GENERAL_CUES = 40
CUE_NOISE = 0.1
DICT_COVERAGE = 0.9
FOREIGN_LANG = "xx"

_EN_ONSETS = ["b", "c", "d", "f", "g", "h", "l", "m", "n", "p", "r", "s", "t", "w", "br", "st", "pl", "gr", "sh", "th"]
_EN_VOWELS = ["a", "e", "i", "o", "u", "ea", "oo", "ai"]
_FX_ONSETS = ["k", "v", "z", "j", "x", "q", "kv", "zr", "dj", "ts"]
_FX_VOWELS = ["a", "e", "i", "o", "u", "y", "aa", "ï"]


@dataclass
class SynthCorpus:
    general: LabeledDataset
    domain: LabeledDataset
    foreign: LabeledDataset
    english_pos: list[str]
    english_neg: list[str]
    english_neutral: list[str]
    dictionary: dict[str, str]
    untranslatable: list[str]
    embeddings: EmbeddingTable
    lexicon_lines: list[str]

    @property
    def english_words(self) -> list[str]:
        return self.english_pos + self.english_neg + self.english_neutral

    def write(self, out_dir) -> dict[str, str]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {
            "general": out / "general.jsonl",
            "domain": out / "domain.jsonl",
            "test": out / "foreign.jsonl",
            "dictionary": out / "dictionary.tsv",
            "wordlist": out / "wordlist.txt",
            "embeddings": out / "embeddings.txt",
            "lexicon": out / "sentiwordnet.txt",
        }
        save_jsonl(self.general, paths["general"])
        save_jsonl(self.domain, paths["domain"])
        save_jsonl(self.foreign, paths["test"])
        with paths["dictionary"].open("w", encoding="utf-8", newline="\n") as fh:
            fh.write("# foreign\tenglish\n")
            for src in sorted(self.dictionary):
                fh.write(f"{src}\t{self.dictionary[src]}\n")
        paths["wordlist"].write_text("# synthetic English word list\n" + "\n".join(sorted(self.english_words)) + "\n",
                                     encoding="utf-8")
        save_glove(self.embeddings, paths["embeddings"])
        paths["lexicon"].write_text("\n".join(self.lexicon_lines) + "\n", encoding="utf-8")
        return {k: str(v) for k, v in paths.items()}


def _words(rng, onsets, vowels, n, taken) -> list[str]:
    out = []
    while len(out) < n:
        syll = rng.integers(2, 4)
        w = "".join(onsets[rng.integers(len(onsets))] + vowels[rng.integers(len(vowels))] for _ in range(syll))
        if w not in taken:
            taken.add(w)
            out.append(w)
    return out


def _review_tokens(rng, label: Label, pos, neg, neutral, n_cues_per_side: int) -> list[str]:
    length = int(rng.integers(5, 31))
    n_cue = min(length, max(2, int(round(0.3 * length))))
    own, other = (pos, neg) if label is Label.POSITIVE else (neg, pos)
    tokens = [neutral[rng.integers(len(neutral))] for _ in range(length)]
    for slot in rng.choice(length, size=n_cue, replace=False):
        source = other if rng.random() < CUE_NOISE else own
        tokens[slot] = source[rng.integers(n_cues_per_side)]
    return tokens


def _dataset(rng, n, name, prefix, lang, domain, pos, neg, neutral, n_cues, mapping=None) -> LabeledDataset:
    reviews = []
    for i in range(n):
        label = Label.POSITIVE if rng.random() < 0.5 else Label.NEGATIVE
        toks = _review_tokens(rng, label, pos, neg, neutral, n_cues)
        if mapping is not None:
            toks = [mapping[t] for t in toks]
        reviews.append(Review(f"{prefix}-{i:05d}", " ".join(toks), label, lang, domain))
    return LabeledDataset(tuple(reviews), name=name)


def _embeddings(rng, pos, neg, neutral, dim) -> EmbeddingTable:
    direction = rng.normal(size=dim)
    direction /= np.linalg.norm(direction)
    vectors = {}
    for words, polarity in ((pos, 1.0), (neg, -1.0), (neutral, 0.0)):
        for w in words:
            vectors[w] = np.round(rng.normal(scale=0.35, size=dim) + polarity * direction, 6)
    return EmbeddingTable(vectors, dim)


def _lexicon(rng, pos, neg, neutral) -> list[str]:
    """SentiWordNet 3.0 layout; covers 60% of the cue words and scores filler noisily."""
    lines = ["# POS\tID\tPosScore\tNegScore\tSynsetTerms\tGloss"]
    sid = 100000
    quarter = np.array([0.0, 0.125, 0.25])
    strong = np.array([0.375, 0.5, 0.625, 0.75])

    def add(word, p, n, sense):
        nonlocal sid
        sid += 1
        lines.append(f"a\t{sid:08d}\t{p:g}\t{n:g}\t{word}#{sense}\tsynthetic gloss")

    for words, sign in ((pos, 1), (neg, -1)):
        covered = rng.choice(len(words), size=int(0.6 * len(words)), replace=False)
        for i in sorted(covered):
            for sense in range(1, int(rng.integers(1, 3)) + 1):
                hi, lo = float(rng.choice(strong)), float(rng.choice(quarter[:2]))
                add(words[i], *((hi, lo) if sign > 0 else (lo, hi)), sense)
    for w in neutral:
        for sense in range(1, int(rng.integers(1, 4)) + 1):
            add(w, float(rng.choice(quarter)), float(rng.choice(quarter)), sense)
    lines.append(f"n\t{sid + 1:08d}\t0.5\t0\t{neutral[0]}_{neutral[1]}#1\tskipped multiword entry")
    return lines


def generate(seed: int = 7, n_general: int = 2000, n_domain: int = 500, n_foreign: int = 500,
             dim: int = 100) -> SynthCorpus:
    for n in (n_general, n_domain, n_foreign):
        if n < 100:
            raise ValueError("every synthetic corpus needs at least 100 reviews")
    rng = np.random.default_rng(seed)
    taken: set[str] = set()
    pos = _words(rng, _EN_ONSETS, _EN_VOWELS, N_POS, taken)
    neg = _words(rng, _EN_ONSETS, _EN_VOWELS, N_NEG, taken)
    neutral = _words(rng, _EN_ONSETS, _EN_VOWELS, N_NEUTRAL, taken)
    english = pos + neg + neutral
    foreign_words = _words(rng, _FX_ONSETS, _FX_VOWELS, len(english), taken)
    to_foreign = dict(zip(english, foreign_words))
    n_missing = len(english) - int(round(DICT_COVERAGE * len(english)))
    missing = set(rng.choice(foreign_words, size=n_missing, replace=False).tolist())
    dictionary = {f: e for e, f in to_foreign.items() if f not in missing}

    general = _dataset(rng, n_general, "general", "gen", "en", "general", pos, neg, neutral, N_GENERAL_CUES)
    domain = _dataset(rng, n_domain, "domain", "dom", "en", "restaurant", pos, neg, neutral, N_POS)
    foreign = _dataset(rng, n_foreign, "foreign", "fx", FOREIGN_LANG, "restaurant", pos, neg, neutral, N_POS,
                       mapping=to_foreign)
    return SynthCorpus(
        general=general, domain=domain, foreign=foreign,
        english_pos=pos, english_neg=neg, english_neutral=neutral,
        dictionary=dictionary, untranslatable=sorted(missing),
        embeddings=_embeddings(rng, pos, neg, neutral, dim),
        lexicon_lines=_lexicon(rng, pos, neg, neutral),
    )


def write_config(paths: dict[str, str], out_dir, seed: int, emb_dim: int = 100) -> Path:
    """A ready-to-run CLI config pointing at the generated files."""
    out = Path(out_dir)
    config = {
        "seed": seed,
        "paths": {**paths, "model": str(out / "model.bin"), "finetuned": str(out / "model-domain.bin"),
                  "vocab": str(out / "vocab.txt"), "cache": str(out / "translation-cache.jsonl"),
                  "out_dir": str(out)},
        "hyperparams": {"emb_dim": emb_dim, "max_len": 200},
        "train": {"epochs_pretrain": 10, "epochs_finetune": 5},
        "translator": {"engine": "dictionary", "dictionary": paths["dictionary"]},
    }
    path = out / "config.json"
    path.write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")
    return path
