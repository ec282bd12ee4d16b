"""Translate test reviews into English before scoring.

Three engines share one interface: ``identity`` (no-op), ``dictionary``
(token-by-token lookup, unknown tokens passed through) and ``remote``
(a JSON-over-HTTP machine translation service). Every result goes through
an append-only JSONL cache keyed by engine, source language and text.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import requests

from .corpus import LabeledDataset, Review
from .textproc import tokenize

logger = logging.getLogger(__name__)

TARGET_LANG = "en"
ENGINES = ("identity", "dictionary", "remote")


class TranslationError(RuntimeError):
    pass


class TranslatorConfigError(ValueError):
    pass


@dataclass(frozen=True)
class TranslatorSettings:
    engine: str = "identity"
    dictionary: str | None = None
    endpoint: str | None = None
    auth_env: str | None = None
    timeout: float = 30.0
    retries: int = 3
    backoff: float = 1.0
    max_workers: int = 4

    def __post_init__(self):
        if self.engine not in ENGINES:
            raise TranslatorConfigError(f"unknown translator engine {self.engine!r}; expected one of {ENGINES}")
        if self.engine == "dictionary" and not self.dictionary:
            raise TranslatorConfigError("dictionary engine needs a 'dictionary' path")
        if self.engine == "remote" and not self.endpoint:
            raise TranslatorConfigError("remote engine needs an 'endpoint' URL")
        if self.engine != "dictionary" and self.dictionary:
            raise TranslatorConfigError("'dictionary' is only valid with the dictionary engine")
        if self.engine != "remote" and (self.endpoint or self.auth_env):
            raise TranslatorConfigError("'endpoint'/'auth_env' are only valid with the remote engine")
        if self.retries < 1 or self.max_workers < 1:
            raise TranslatorConfigError("retries and max_workers must be >= 1")

    @classmethod
    def from_json(cls, d: dict) -> "TranslatorSettings":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise TranslatorConfigError(f"unknown translator keys: {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class TranslationRecord:
    source_lang: str
    source_text: str
    translated_text: str
    engine_id: str

    @property
    def key(self) -> str:
        return cache_key(self.engine_id, self.source_lang, self.source_text)


def cache_key(engine_id: str, source_lang: str, source_text: str) -> str:
    payload = json.dumps([engine_id, source_lang, source_text], ensure_ascii=False)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class TranslationCache:
    """Append-only JSONL store; the last record written for a key wins."""

    def __init__(self, path=None):
        self.path = Path(path) if path is not None else None
        self._records: dict[str, TranslationRecord] = {}
        self._lock = threading.Lock()
        if self.path is not None and self.path.exists():
            self._load()

    def _load(self) -> None:
        try:
            lines = self.path.read_text(encoding="utf-8").splitlines()
        except (OSError, UnicodeDecodeError) as exc:
            raise TranslationError(f"cannot read translation cache {self.path}: {exc}") from None
        for lineno, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                rec = TranslationRecord(obj["source_lang"], obj["source_text"], obj["translated_text"], obj["engine_id"])
            except (ValueError, KeyError, TypeError):
                raise TranslationError(f"{self.path}:{lineno}: corrupt cache record") from None
            if obj.get("key") not in (None, rec.key):
                raise TranslationError(f"{self.path}:{lineno}: cache key does not match record content")
            self._records[rec.key] = rec

    def __len__(self) -> int:
        return len(self._records)

    def get(self, key: str) -> TranslationRecord | None:
        return self._records.get(key)

    def put(self, record: TranslationRecord) -> None:
        with self._lock:
            self._records[record.key] = record
            if self.path is not None:
                line = json.dumps({"key": record.key, "source_lang": record.source_lang,
                                   "source_text": record.source_text,
                                   "translated_text": record.translated_text,
                                   "engine_id": record.engine_id}, ensure_ascii=False)
                with self.path.open("a", encoding="utf-8", newline="\n") as fh:
                    fh.write(line + "\n")


def load_dictionary(path) -> dict[str, str]:
    """Tab-separated ``source<TAB>english`` pairs; ``#`` lines are comments."""
    mapping: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
                raise TranslatorConfigError(f"{path}:{lineno}: expected 'source<TAB>target'")
            src = tokenize(parts[0])
            if len(src) != 1:
                raise TranslatorConfigError(f"{path}:{lineno}: source entry must be a single token")
            mapping.setdefault(src[0], " ".join(tokenize(parts[1])) or parts[1].strip().lower())
    return mapping


def dictionary_translate(mapping: dict[str, str], text: str) -> str:
    return " ".join(mapping.get(t, t) for t in tokenize(text))


class Translator:
    """Engine plus cache. ``calls`` counts engine invocations (cache misses)."""

    def __init__(self, settings: TranslatorSettings, cache: TranslationCache | None = None,
                 session: requests.Session | None = None):
        self.settings = settings
        self.cache = cache if cache is not None else TranslationCache()
        self.calls = 0
        self._calls_lock = threading.Lock()
        self._mapping = None
        if settings.engine == "dictionary":
            raw = Path(settings.dictionary).read_bytes()
            self._mapping = load_dictionary(settings.dictionary)
            self.engine_id = "dictionary:" + hashlib.sha256(raw).hexdigest()[:16]
        elif settings.engine == "remote":
            self.engine_id = "remote:" + settings.endpoint
            self._session = session or requests.Session()
        else:
            self.engine_id = "identity"

    def _engine(self, text: str, source_lang: str, review_id: str) -> str:
        with self._calls_lock:
            self.calls += 1
        if self.settings.engine == "identity":
            return text
        if self.settings.engine == "dictionary":
            return dictionary_translate(self._mapping, text)
        return self._remote(text, source_lang, review_id)

    def _remote(self, text: str, source_lang: str, review_id: str) -> str:
        headers = {"Content-Type": "application/json"}
        if self.settings.auth_env:
            key = os.environ.get(self.settings.auth_env)
            if not key:
                raise TranslationError(f"review {review_id}: environment variable {self.settings.auth_env} is not set")
            headers["Authorization"] = f"Bearer {key}"
        body = {"q": text, "source": source_lang, "target": TARGET_LANG}
        last = None
        for attempt in range(self.settings.retries):
            if attempt:
                time.sleep(self.settings.backoff * 2 ** (attempt - 1))
            try:
                resp = self._session.post(self.settings.endpoint, json=body, headers=headers, timeout=self.settings.timeout)
                resp.raise_for_status()
                out = resp.json()["translatedText"]
                if not isinstance(out, str):
                    raise ValueError("translatedText is not a string")
                return out
            except (requests.RequestException, ValueError, KeyError) as exc:
                last = exc
                logger.warning("translation of %s failed (attempt %d/%d): %s",
                               review_id, attempt + 1, self.settings.retries, exc)
        raise TranslationError(f"review {review_id}: translation failed after {self.settings.retries} attempts: {last}")

    def translate_text(self, text: str, source_lang: str, review_id: str = "?") -> str:
        key = cache_key(self.engine_id, source_lang, text)
        hit = self.cache.get(key)
        if hit is not None:
            return hit.translated_text
        out = self._engine(text, source_lang, review_id)
        if text.strip() and not out.strip():
            raise TranslationError(f"review {review_id}: engine returned an empty translation")
        self.cache.put(TranslationRecord(source_lang, text, out, self.engine_id))
        return out

    def translate_review(self, review: Review) -> Review:
        if not review.text.strip():
            raise TranslationError(f"review {review.id}: empty text")
        if review.lang == TARGET_LANG:
            return review
        text = self.translate_text(review.text, review.lang, review.id)
        return replace(review, text=text, lang=TARGET_LANG)

    def translate_dataset(self, ds: LabeledDataset) -> LabeledDataset:
        workers = self.settings.max_workers if self.settings.engine == "remote" else 1
        if workers == 1:
            out = [self.translate_review(r) for r in ds]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                out = list(pool.map(self.translate_review, ds))
        return ds.with_reviews(out)
