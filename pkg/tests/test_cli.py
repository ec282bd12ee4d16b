import json

import pytest

from xlsent.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    """Synthetic corpus plus pretrained and fine-tuned models at a reduced size."""
    root = tmp_path_factory.mktemp("synth")
    assert main(["synth-gen", "--out-dir", str(root), "--sizes", "300", "100", "100", "--dim", "16",
                 "--seed", "3", "--out", str(root / "gen.json")]) == 0
    cfg = root / "config.json"
    raw = json.loads(cfg.read_text())
    raw["hyperparams"].update(hidden=8, max_len=40)
    cfg.write_text(json.dumps(raw))
    assert main(["pretrain", "--config", str(cfg), "--epochs", "4", "--lr", "0.01", "--out", str(root / "pre.json")]) == 0
    assert main(["finetune", "--config", str(cfg), "--epochs", "2", "--out", str(root / "ft.json")]) == 0
    return root, cfg


def test_help_lists_flags(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["pretrain", "--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    for flag in ("--config", "--epochs", "--cell-type", "--checkpoints", "--seed"):
        assert flag in out


def test_unknown_flag_exits_1(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["evaluate", "--bogus"])
    assert exc.value.code == 1


def test_missing_config_key_is_named(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"paths": {}}))
    code, _, err = run(capsys, "pretrain", "--config", str(cfg))
    assert code == 1 and "paths.general" in err


def test_missing_file_exits_1(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"paths": {"test": str(tmp_path / "nope.jsonl")}}))
    code, _, err = run(capsys, "baseline-majority", "--config", str(cfg))
    assert code == 1 and "not found" in err


def test_unknown_config_key_exits_1(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"sed": 1}))
    code, _, err = run(capsys, "baseline-majority", "--config", str(cfg))
    assert code == 1 and "sed" in err


def test_compare(tmp_path, capsys):
    groups = tmp_path / "g.json"
    groups.write_text(json.dumps({"a": [1.0, 2.0, 3.0], "b": [1.5, 2.5, 3.5], "c": [9.0, 10.0, 11.0]}))
    code, out, _ = run(capsys, "compare", "--groups", str(groups))
    report = json.loads(out)
    assert code == 0 and report["schema"] == 1
    assert [(r["group1"], r["group2"]) for r in report["comparisons"]] == [("a", "b"), ("a", "c"), ("b", "c")]
    assert [r["reject"] for r in report["comparisons"]] == [False, True, True]
    assert len(report["effect_sizes"]) == 3


def test_gradcheck_passes(capsys):
    code, out, _ = run(capsys, "gradcheck", "--cell", "gru", "--coords", "20")
    report = json.loads(out)
    assert code == 0 and report["passed"] and report["max_rel_error"] <= 1e-4


def test_pipeline_small(small_run, capsys):
    root, cfg = small_run
    pre = json.loads((root / "pre.json").read_text())
    ft = json.loads((root / "ft.json").read_text())
    assert pre["vocab_size"] > 0 and (root / "model.bin").exists() and (root / "model-domain.bin").exists()
    assert ft["best_val_accuracy"] >= ft["start_val_accuracy"]

    preds = root / "rnn.jsonl"
    assert main(["score", "--config", str(cfg), "--translate", "--out", str(preds)]) == 0
    rows = [json.loads(line) for line in preds.read_text().splitlines()]
    assert len(rows) == 100 and all(set(r) == {"id", "p_pos", "label"} for r in rows)
    code, out, _ = run(capsys, "evaluate", "--config", str(cfg), "--predictions", str(preds), "--translate")
    report = json.loads(out)
    assert code == 0 and report["total"] == 100
    assert report["tp"] + report["tn"] + report["fp"] + report["fn"] == 100


def test_warm_cache_is_idempotent(small_run, capsys):
    root, cfg = small_run
    first = root / "t1.jsonl"
    second = root / "t2.jsonl"
    assert main(["translate", "--config", str(cfg), "--output", str(first)]) == 0
    cache_size = (root / "translation-cache.jsonl").stat().st_size
    assert main(["translate", "--config", str(cfg), "--output", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
    assert (root / "translation-cache.jsonl").stat().st_size == cache_size


def test_baselines_and_error_analysis(small_run, capsys):
    root, cfg = small_run
    code, out, _ = run(capsys, "baseline-majority", "--config", str(cfg))
    assert code == 0 and 0 < json.loads(out)["accuracy_pct"] <= 100
    lex = root / "lex.jsonl"
    assert main(["baseline-lexicon", "--config", str(cfg), "--translate", "--out", str(lex)]) == 0
    code, out, _ = run(capsys, "error-analysis", "--config", str(cfg), "--predictions", str(lex), "--translate")
    report = json.loads(out)
    assert code == 0 and report["dataset"] == "lex"
    assert len(report["errors"]) == report["report"]["fp"] + report["report"]["fn"]


def test_model_mismatch_exits_1(small_run, capsys):
    root, cfg = small_run
    raw = json.loads(cfg.read_text())
    raw["hyperparams"]["hidden"] = 9
    other = root / "other.json"
    other.write_text(json.dumps(raw))
    code, _, err = run(capsys, "score", "--config", str(other))
    assert code == 1 and "hidden" in err
