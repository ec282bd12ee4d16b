"""Command-line entry point: ``xlsent <command> --config run.json [flags]``.

Exit status is 0 on success, 1 for invalid input or configuration and 2
for failures while running (translation service down, numerical blow-up,
failed gradient check).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .analysis import cohens_d, comparison_table, error_table, evaluate, tukey_hsd
from .baselines import lexicon_label, lexicon_sums, majority_accuracy, majority_label, parse_sentiwordnet
from .checks import model_gradcheck
from .config import ConfigError, RunConfig
from .corpus import Label, LabeledDataset, label_distribution, load_jsonl, save_jsonl
from .embeddings import load_glove, project
from .model import Hyperparams
from .model import load as load_model
from .model import save as save_model
from .textproc import Vocabulary, WordList, build_vocab, contains_non_english, tokenize
from .training import finetune, pretrain, score_dataset
from .translation import TranslationCache, Translator

logger = logging.getLogger("xlsent")

GRADCHECK_TOLERANCE = 1e-4


class CLIError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    """Usage errors (unknown flag, bad value) exit with status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- helpers


def _config(args, epochs_key: str | None = None) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    # flags named after path keys override the file
    for key in ("embeddings", "lexicon", "wordlist", "general", "domain", "model", "finetuned", "vocab",
                "cache", "dictionary", "out_dir"):
        value = getattr(args, key, None)
        if value is not None:
            cfg.paths[key] = str(value)
    if getattr(args, "dictionary", None) is not None:
        cfg.translator = {**cfg.translator, "engine": "dictionary", "dictionary": str(args.dictionary)}
    for flag, key in (("max_len", "max_len"), ("cell_type", "cell_type"), ("hidden", "hidden")):
        value = getattr(args, flag, None)
        if value is not None:
            cfg.hyperparams[key] = value
    for flag, key in (("epochs", epochs_key), ("batch_size", "batch_size"), ("lr", "lr")):
        value = getattr(args, flag, None)
        if value is not None and key is not None:
            cfg.train[key] = value
    return cfg


def _emit(payload, out: str | None) -> None:
    text = payload if isinstance(payload, str) else json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _jsonl(rows) -> str:
    return "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in rows)


def _input(args, cfg: RunConfig, key: str = "test") -> LabeledDataset:
    path = args.input or cfg.paths.get(key)
    if not path:
        raise ConfigError(f"missing config key paths.{key} (or pass --input)")
    if not Path(path).exists():
        raise ConfigError(f"--input: file not found: {path}")
    return load_jsonl(path)


def _translator(cfg: RunConfig) -> Translator:
    cache_path = cfg.paths.get("cache")
    return Translator(cfg.translator_settings(), TranslationCache(cache_path) if cache_path else None)


def _maybe_translate(ds: LabeledDataset, cfg: RunConfig, enabled: bool) -> LabeledDataset:
    if not enabled:
        return ds
    tr = _translator(cfg)
    out = tr.translate_dataset(ds)
    logger.info("translated %d reviews (%d engine calls, %d served from cache)", len(ds), tr.calls,
                len(ds) - tr.calls)
    return out


def _embedding(cfg: RunConfig, vocab: Vocabulary, hp: Hyperparams):
    table = load_glove(cfg.path("embeddings"), hp.emb_dim)
    emb = project(vocab, table, hp.emb_dim)
    logger.info("embedding coverage %.1f%% of %d vocabulary words", 100 * emb.coverage, len(vocab) - 2)
    return emb


def _load_model(cfg: RunConfig, key: str):
    hp = cfg.hp()
    weights, _ = load_model(cfg.path(key), expected=hp)
    vocab = Vocabulary.load(cfg.path("vocab"))
    return weights, vocab, _embedding(cfg, vocab, hp)


def _predictions_file(path) -> list[tuple[str, str]]:
    rows = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                rows.append((str(obj["id"]), obj["label"]))
            except (ValueError, KeyError, TypeError):
                raise CLIError(f"{path}:{lineno}: expected {{\"id\", \"p_pos\", \"label\"}}") from None
    if not rows:
        raise CLIError(f"{path}: no predictions")
    return rows


def _wordlist(cfg: RunConfig, explicit: str | None) -> WordList:
    if explicit:
        return WordList.from_file(explicit)
    if cfg.paths.get("wordlist"):
        return WordList.from_file(cfg.path("wordlist"))
    # fall back to the words that have a pre-trained vector
    table = load_glove(cfg.path("embeddings"), cfg.hp().emb_dim)
    return WordList(table.vectors)


def _checkpoint_saver(model_path: Path, vocab: Vocabulary):
    def save(epoch, weights):
        target = model_path.with_name(f"{model_path.stem}.epoch{epoch}{model_path.suffix}")
        save_model(weights, target, vocab.content_hash())
    return save


# ---------------------------------------------------------------- commands


def cmd_pretrain(args) -> int:
    cfg = _config(args, "epochs_pretrain")
    hp, tcfg = cfg.hp(), cfg.train_config()
    general = load_jsonl(cfg.path("general"), name="general")
    # the vocabulary also covers the fine-tuning corpus so both stages share one input space
    sources = [general]
    if cfg.paths.get("domain"):
        sources.append(load_jsonl(cfg.path("domain"), name="domain"))
    vocab = build_vocab(sources)
    emb = _embedding(cfg, vocab, hp)
    model_path = cfg.path("model", must_exist=False)
    hook = _checkpoint_saver(model_path, vocab) if args.checkpoints else None
    weights, log = pretrain(general, hp, tcfg, emb, vocab, on_epoch=hook)
    vocab.save(cfg.path("vocab", must_exist=False))
    save_model(weights, model_path, vocab.content_hash())
    _emit({**log.to_json(), "model": str(model_path), "vocab_size": len(vocab),
           "embedding_coverage": emb.coverage}, args.out)
    return 0


def cmd_finetune(args) -> int:
    cfg = _config(args, "epochs_finetune")
    start, vocab, emb = _load_model(cfg, "model")
    domain = load_jsonl(cfg.path("domain"), name="domain")
    out_path = cfg.path("finetuned", must_exist=False)
    hook = _checkpoint_saver(out_path, vocab) if args.checkpoints else None
    weights, log = finetune(start, domain, cfg.train_config(), emb, vocab, on_epoch=hook)
    save_model(weights, out_path, vocab.content_hash())
    _emit({**log.to_json(), "model": str(out_path)}, args.out)
    return 0


def cmd_translate(args) -> int:
    cfg = _config(args)
    ds = _input(args, cfg)
    tr = _translator(cfg)
    out = tr.translate_dataset(ds)
    if args.output:
        save_jsonl(out, args.output)
    else:
        sys.stdout.write(_jsonl(r.to_json() for r in out))
    logger.info("%d reviews, %d engine calls", len(ds), tr.calls)
    return 0


def cmd_score(args) -> int:
    cfg = _config(args)
    # without --model, prefer the fine-tuned weights when they exist
    finetuned = cfg.paths.get("finetuned")
    key = "finetuned" if args.model is None and finetuned and Path(finetuned).exists() else "model"
    weights, vocab, emb = _load_model(cfg, key)
    ds = _maybe_translate(_input(args, cfg), cfg, args.translate)
    preds = score_dataset(weights, ds, vocab, emb)
    _emit(_jsonl({"id": rid, "p_pos": p.p_pos, "label": p.label.value} for rid, p in preds), args.out)
    return 0


def cmd_baseline_majority(args) -> int:
    cfg = _config(args)
    ds = _input(args, cfg)
    dist = label_distribution(ds)
    _emit({"schema": 1, "baseline": "majority", "total": dist.total, "positives": dist.positives,
           "negatives": dist.negatives, "majority_label": majority_label(ds).value,
           "accuracy_pct": majority_accuracy(ds)}, args.out)
    return 0


def cmd_baseline_lexicon(args) -> int:
    cfg = _config(args)
    lex = parse_sentiwordnet(cfg.path("lexicon")).require_nonempty()
    ds = _maybe_translate(_input(args, cfg), cfg, args.translate)
    rows = []
    for r in ds:
        tokens = tokenize(r.text)
        pos, neg = lexicon_sums(tokens, lex)
        share = pos / (pos + neg) if pos + neg > 0 else 0.5
        rows.append({"id": r.id, "p_pos": share, "label": lexicon_label(tokens, lex).value})
    _emit(_jsonl(rows), args.out)
    return 0


def _gold_and_preds(args, cfg):
    gold_path = args.gold or cfg.paths.get("test")
    if not gold_path:
        raise ConfigError("missing config key paths.test (or pass --gold)")
    if not Path(gold_path).exists():
        raise ConfigError(f"--gold: file not found: {gold_path}")
    if not Path(args.predictions).exists():
        raise ConfigError(f"--predictions: file not found: {args.predictions}")
    gold = _maybe_translate(load_jsonl(gold_path), cfg, args.translate)
    return gold, _predictions_file(args.predictions)


def cmd_evaluate(args) -> int:
    cfg = _config(args)
    gold, preds = _gold_and_preds(args, cfg)
    report = evaluate(preds, gold, _wordlist(cfg, args.wordlist))
    _emit(report.to_json(), args.out)
    return 0


def cmd_error_analysis(args) -> int:
    cfg = _config(args)
    gold, preds = _gold_and_preds(args, cfg)
    wordlist = _wordlist(cfg, args.wordlist)
    report = evaluate(preds, gold, wordlist)
    predicted = {rid: Label.parse(lab).value for rid, lab in preds}
    errors = []
    for r in gold:
        if predicted[r.id] != r.label.value:
            tokens = tokenize(r.text)
            errors.append({"id": r.id, "gold": r.label.value, "predicted": predicted[r.id],
                           "kind": "false_positive" if r.label.value == "neg" else "false_negative",
                           "non_english": contains_non_english(tokens, wordlist),
                           "unknown_words": sorted({t for t in tokens if t.isalpha() and t not in wordlist})})
    name = args.name or Path(args.predictions).stem
    _emit({"schema": 1, "dataset": name, "report": report.to_json(), "errors": errors,
           "table": error_table([(name, report)])}, args.out)
    return 0


def cmd_compare(args) -> int:
    try:
        groups = json.loads(Path(args.groups).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"--groups: file not found: {args.groups}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{args.groups}: invalid JSON ({exc.msg})") from None
    if not isinstance(groups, dict) or not all(isinstance(v, list) for v in groups.values()):
        raise ConfigError(f"{args.groups}: expected an object mapping system name to a list of accuracies")
    rows = tukey_hsd(groups, alpha=args.alpha)
    effects = []
    for r in rows:
        es = cohens_d(groups[r.group1], groups[r.group2])
        effects.append({"group1": r.group1, "group2": r.group2, **es.to_json()})
    _emit({"schema": 1, "alpha": args.alpha, "comparisons": [r.to_json() for r in rows],
           "effect_sizes": effects, "table": comparison_table(rows)}, args.out)
    return 0


def cmd_gradcheck(args) -> int:
    cells = ["gru", "lstm"] if args.cell == "both" else [args.cell]
    seed = args.seed if args.seed is not None else 0
    per_cell = {}
    for cell in cells:
        errs = model_gradcheck(cell, batch=args.batch, seq_len=args.seq_len, seed=seed, n_coords=args.coords)
        worst = max(errs, key=errs.get)
        per_cell[cell] = {"max_rel_error": errs[worst], "worst_tensor": worst, "tensors": len(errs)}
    overall = max(v["max_rel_error"] for v in per_cell.values())
    passed = overall <= GRADCHECK_TOLERANCE
    _emit({"schema": 1, "max_rel_error": overall, "tolerance": GRADCHECK_TOLERANCE, "passed": passed,
           "cells": per_cell}, args.out)
    return 0 if passed else 2


def cmd_synth_gen(args) -> int:
    from .synth import generate, write_config

    seed = args.seed if args.seed is not None else 7
    n_general, n_domain, n_foreign = args.sizes
    corpus = generate(seed, n_general, n_domain, n_foreign, dim=args.dim)
    paths = corpus.write(args.out_dir)
    config = write_config(paths, args.out_dir, seed, emb_dim=args.dim)
    _emit({"schema": 1, "seed": seed, "files": paths, "config": str(config)}, args.out)
    return 0


# ---------------------------------------------------------------- parser


def _common(p: argparse.ArgumentParser, seed=True) -> None:
    p.add_argument("--config", metavar="JSON", help="run configuration file")
    p.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
    if seed:
        p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")


def _model_flags(p, key="model"):
    p.add_argument(f"--{key}", metavar="PATH", help=f"model file (paths.{key})")
    p.add_argument("--vocab", metavar="PATH", help="vocabulary file (paths.vocab)")
    p.add_argument("--embeddings", metavar="PATH", help="GloVe text file (paths.embeddings)")


def _translate_flags(p):
    p.add_argument("--translate", action="store_true", help="translate non-English reviews to English first")
    p.add_argument("--cache", metavar="PATH", help="translation cache JSONL (paths.cache)")
    p.add_argument("--dictionary", metavar="PATH", help="bilingual dictionary TSV (paths.dictionary)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="xlsent", description="Cross-lingual review polarity pipeline.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    p = sub.add_parser("pretrain", help="train on the general English corpus")
    _common(p)
    p.add_argument("--general", metavar="PATH", help="general-domain training JSONL (paths.general)")
    p.add_argument("--domain", metavar="PATH", help="domain JSONL, used for the vocabulary (paths.domain)")
    _model_flags(p)
    p.add_argument("--cell-type", dest="cell_type", choices=["gru", "lstm"], help="recurrent cell")
    p.add_argument("--hidden", type=int, help="units per direction")
    p.add_argument("--max-len", dest="max_len", type=int, help="tokens kept per review")
    p.add_argument("--epochs", type=int, help="maximum pretraining epochs")
    p.add_argument("--batch-size", dest="batch_size", type=int, help="mini-batch size")
    p.add_argument("--lr", type=float, help="Adam learning rate")
    p.add_argument("--checkpoints", action="store_true", help="also save <model>.epochN after every epoch")
    p.set_defaults(func=cmd_pretrain)

    p = sub.add_parser("finetune", help="continue training a pretrained model on the domain corpus")
    _common(p)
    _model_flags(p)
    p.add_argument("--domain", metavar="PATH", help="domain training JSONL (paths.domain)")
    p.add_argument("--finetuned", metavar="PATH", help="output model file (paths.finetuned)")
    p.add_argument("--epochs", type=int, help="maximum fine-tuning epochs")
    p.add_argument("--batch-size", dest="batch_size", type=int, help="mini-batch size")
    p.add_argument("--lr", type=float, help="Adam learning rate")
    p.add_argument("--checkpoints", action="store_true", help="also save <finetuned>.epochN after every epoch")
    p.set_defaults(func=cmd_finetune)

    p = sub.add_parser("translate", help="translate a JSONL corpus into English")
    _common(p, seed=False)
    p.add_argument("--input", metavar="PATH", help="reviews to translate (default paths.test)")
    p.add_argument("--output", metavar="PATH", help="translated JSONL (default stdout)")
    p.add_argument("--cache", metavar="PATH", help="translation cache JSONL (paths.cache)")
    p.add_argument("--dictionary", metavar="PATH", help="bilingual dictionary TSV (paths.dictionary)")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("score", help="write model predictions as JSONL")
    _common(p, seed=False)
    _model_flags(p)
    p.add_argument("--input", metavar="PATH", help="reviews to score (default paths.test)")
    _translate_flags(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("baseline-majority", help="accuracy of predicting the most frequent class")
    _common(p, seed=False)
    p.add_argument("--input", metavar="PATH", help="labelled reviews (default paths.test)")
    p.set_defaults(func=cmd_baseline_majority)

    p = sub.add_parser("baseline-lexicon", help="SentiWordNet sum-rule predictions as JSONL")
    _common(p, seed=False)
    p.add_argument("--input", metavar="PATH", help="reviews to label (default paths.test)")
    p.add_argument("--lexicon", metavar="PATH", help="SentiWordNet file (paths.lexicon)")
    _translate_flags(p)
    p.set_defaults(func=cmd_baseline_lexicon)

    for name, func, text in (("evaluate", cmd_evaluate, "accuracy and error breakdown of a predictions file"),
                             ("error-analysis", cmd_error_analysis, "list misclassified reviews")):
        p = sub.add_parser(name, help=text)
        _common(p, seed=False)
        p.add_argument("--predictions", metavar="PATH", required=True, help="predictions JSONL")
        p.add_argument("--gold", metavar="PATH", help="gold reviews (default paths.test)")
        p.add_argument("--wordlist", metavar="PATH",
                       help="English word list (default paths.wordlist, else the embedding vocabulary)")
        p.add_argument("--embeddings", metavar="PATH", help="GloVe text file (paths.embeddings)")
        _translate_flags(p)
        if name == "error-analysis":
            p.add_argument("--name", help="dataset name for the table (default: predictions file stem)")
        p.set_defaults(func=func)

    p = sub.add_parser("compare", help="Tukey HSD and Cohen's d over per-dataset accuracies")
    _common(p, seed=False)
    p.add_argument("--groups", metavar="JSON", required=True, help='{"system": [accuracy, ...], ...}')
    p.add_argument("--alpha", type=float, default=0.05, help="family-wise significance level (default 0.05)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("gradcheck", help="finite-difference check of the full model's gradients")
    _common(p)
    p.add_argument("--cell", choices=["gru", "lstm", "both"], default="both", help="cell type(s) to check")
    p.add_argument("--batch", type=int, default=3, help="batch size (default 3)")
    p.add_argument("--seq-len", dest="seq_len", type=int, default=5, help="sequence length (default 5)")
    p.add_argument("--coords", type=int, default=200, help="coordinates sampled per tensor (default 200)")
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("synth-gen", help="write a synthetic corpus, dictionary, vectors, lexicon and config")
    _common(p)
    p.add_argument("--out-dir", dest="out_dir", required=True, metavar="DIR", help="output directory")
    p.add_argument("--sizes", type=int, nargs=3, default=(2000, 500, 500), metavar=("GENERAL", "DOMAIN", "FOREIGN"),
                   help="reviews per corpus (default 2000 500 500)")
    p.add_argument("--dim", type=int, default=100, help="embedding dimension (default 100)")
    p.set_defaults(func=cmd_synth_gen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, NotImplementedError) as exc:
        print(f"xlsent {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - anything else is a runtime failure
        logger.debug("runtime failure", exc_info=True)
        print(f"xlsent {args.command}: failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
