"""JSON run configuration shared by all CLI subcommands."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .model import Hyperparams
from .training import TrainConfig
from .translation import TranslatorSettings

PATH_KEYS = (
    "embeddings", "lexicon", "wordlist", "general", "domain", "test", "model", "finetuned",
    "vocab", "cache", "dictionary", "out_dir",
)
TOP_LEVEL_KEYS = {"seed", "paths", "hyperparams", "train", "translator"}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    seed: int = 0
    paths: dict[str, str] = field(default_factory=dict)
    hyperparams: dict = field(default_factory=dict)
    train: dict = field(default_factory=dict)
    translator: dict = field(default_factory=dict)

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc.msg}, line {exc.lineno})") from None
        return cls.from_json(raw)

    @classmethod
    def from_json(cls, raw: dict) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(raw) - TOP_LEVEL_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        paths = dict(raw.get("paths", {}))
        bad = set(paths) - set(PATH_KEYS)
        if bad:
            raise ConfigError(f"unknown paths keys: {sorted(bad)}")
        return cls(seed=int(raw.get("seed", 0)), paths=paths, hyperparams=dict(raw.get("hyperparams", {})),
                   train=dict(raw.get("train", {})), translator=dict(raw.get("translator", {})))

    def path(self, key: str, must_exist: bool = True) -> Path:
        value = self.paths.get(key)
        if not value:
            raise ConfigError(f"missing config key paths.{key}")
        p = Path(value)
        if must_exist and not p.exists():
            raise ConfigError(f"paths.{key}: file not found: {p}")
        return p

    def optional_path(self, key: str) -> Path | None:
        return self.path(key) if self.paths.get(key) else None

    def hp(self) -> Hyperparams:
        try:
            return Hyperparams.from_json(self.hyperparams)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"hyperparams: {exc}") from None

    def train_config(self) -> TrainConfig:
        # the run seed drives every random stream
        try:
            return TrainConfig.from_json({**self.train, "seed": self.seed})
        except TypeError as exc:
            raise ConfigError(f"train: {exc}") from None

    def translator_settings(self) -> TranslatorSettings:
        settings = dict(self.translator)
        if not settings:
            raise ConfigError("missing config key translator")
        if settings.get("engine") == "dictionary" and "dictionary" not in settings and self.paths.get("dictionary"):
            settings["dictionary"] = self.paths["dictionary"]
        if settings.get("dictionary") and not Path(settings["dictionary"]).exists():
            raise ConfigError(f"translator.dictionary: file not found: {settings['dictionary']}")
        return TranslatorSettings.from_json(settings)
