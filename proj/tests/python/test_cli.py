"""End-to-end checks of the command-line tool via subprocess."""

import json
import os
import subprocess
import sys

import pytest

BIN = os.environ.get("TUNISENT_BIN")
if not BIN or not os.path.exists(BIN):
    pytest.skip("TUNISENT_BIN does not point at the built binary",
                allow_module_level=True)


def run(*args, expect=0):
    proc = subprocess.run([BIN, *args], capture_output=True, text=True)
    assert proc.returncode == expect, (
        f"{args} -> rc={proc.returncode}\nstdout:\n{proc.stdout}"
        f"\nstderr:\n{proc.stderr}")
    return proc


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


TOY_CSV = (
    "id,text,label\n"
    "1,3asslema w mar7be,positive\n"
    "2,nakrhek 5atrek cherrir,negative\n"
    "3,mezyan barcha,positive\n"
    "4,5ayeb yeser,negative\n"
)


def test_stats_json_fields(tmp_path):
    data = write(tmp_path / "toy.csv", TOY_CSV)
    out = json.loads(run("stats", data).stdout)
    assert list(out.keys()) == [
        "n_words", "n_unique_words", "n_comments", "n_negative",
        "n_positive", "n_train", "n_test",
    ]
    assert out["n_comments"] == 4
    assert out["n_positive"] == 2
    assert out["n_negative"] == 2


def test_stats_format_independence(tmp_path):
    csv = write(tmp_path / "a.csv", "id,text,label\n1,ya weldi,positive\n")
    tsv = write(tmp_path / "a.tsv", "id\ttext\tlabel\n1\tya weldi\tpositive\n")
    assert run("stats", csv).stdout == run("stats", tsv).stdout


def test_stats_empty_file_exits_2(tmp_path):
    empty = write(tmp_path / "empty.csv", "")
    proc = run("stats", empty, expect=2)
    assert "no records" in proc.stderr


def test_stats_schema_error_exits_2(tmp_path):
    bad = write(tmp_path / "bad.csv", "id,text,label\n1,missing label\n")
    proc = run("stats", bad, expect=2)
    assert "row 1" in proc.stderr


def test_filter_drops_arabic_rows(tmp_path):
    mixed = write(
        tmp_path / "mixed.csv",
        "id,text,label\n"
        "1,3asslema,positive\n"
        "2,مرحبا,positive\n"
        "3,good هاو,negative\n"
        "4,bara a9ra,negative\n",
    )
    out = tmp_path / "filtered.csv"
    run("filter", mixed, str(out))
    lines = out.read_text(encoding="utf-8").strip().splitlines()
    assert lines[0] == "id,text,label"
    assert len(lines) == 3  # header + 2 kept rows
    assert (tmp_path / "filtered.csv.resolved.json").exists()

    # idempotence: filtering the filtered file is byte-identical
    out2 = tmp_path / "filtered2.csv"
    run("filter", str(out), str(out2))
    assert out.read_text(encoding="utf-8") == out2.read_text(encoding="utf-8")


def test_filter_arabic_only_writes_header(tmp_path):
    arabic = write(tmp_path / "ar.csv",
                   "id,text,label\n1,مرحبا,positive\n2,سؤال,negative\n")
    out = tmp_path / "out.csv"
    run("filter", arabic, str(out))
    assert out.read_text(encoding="utf-8") == "id,text,label\n"


def train_toy(tmp_path, seed=3):
    rows = ["id,text,label"]
    for i in range(40):
        pos = i % 2 == 0
        text = "mezyan behi yeser" if pos else "5ayeb mouch behi"
        rows.append(f"{i},{text},{'positive' if pos else 'negative'}")
    data = write(tmp_path / "toy.csv", "\n".join(rows) + "\n")
    config = {
        "dataset": {"path": data, "name": "toy",
                    "split": {"test_fraction": 0.25}, "split_seed": 1},
        "embedding": "word2vec_self",
        "classifier": "cnn",
        "epochs": 2,
        "batch_size": 8,
        "seed": seed,
        "max_len": 8,
        "filter_widths": [1, 2],
        "filters_per_width": 4,
        "word2vec": {"dim": 8, "epochs": 2},
        "out_dir": str(tmp_path / "out"),
    }
    cfg = write(tmp_path / "cell.json", json.dumps(config))
    return cfg, data


def test_train_eval_predict_report_roundtrip(tmp_path):
    cfg, data = train_toy(tmp_path)
    report = json.loads(run("train", cfg).stdout)
    for key in ("accuracy", "f1_micro", "f1_macro", "confusion", "spec"):
        assert key in report
    assert report["spec"]["epochs"] == 2

    # determinism: identical config and seeds reproduce the metrics
    report2 = json.loads(run("train", cfg).stdout)
    assert report2["accuracy"] == report["accuracy"]
    assert report2["f1_macro"] == report["f1_macro"]

    ckpt = tmp_path / "out" / "checkpoints" / "toy" / "word2vec_self-cnn"
    assert (ckpt / "resolved_config.json").exists()

    evaluation = json.loads(run("eval", str(ckpt), data).stdout)
    assert 0.0 <= evaluation["accuracy"] <= 1.0

    pred = run("predict", str(ckpt), data).stdout.splitlines()
    assert pred[0] == "id,polarity,probability"
    assert len(pred) == 41
    assert pred[1].split(",")[1] in ("positive", "negative")

    csv = run("report", str(tmp_path / "out" / "reports")).stdout
    lines = csv.strip().splitlines()
    assert lines[0] == "embedding,classifier,dataset,acc,f1_micro,f1_macro"
    assert len(lines) == 2
    assert lines[1].startswith("word2vec_self,cnn,toy,")


def test_predict_empty_input(tmp_path):
    cfg, _ = train_toy(tmp_path)
    run("train", cfg)
    ckpt = tmp_path / "out" / "checkpoints" / "toy" / "word2vec_self-cnn"
    empty = write(tmp_path / "empty.csv", "id,text\n")
    proc = run("predict", str(ckpt), empty)
    assert proc.stdout == "id,polarity,probability\n"


def test_train_missing_contextual_checkpoint_exits_3(tmp_path):
    cfg, _ = train_toy(tmp_path)
    config = json.loads((tmp_path / "cell.json").read_text())
    config["embedding"] = "contextual"
    config["model_dir"] = str(tmp_path / "no_such_model")
    cfg2 = write(tmp_path / "cell2.json", json.dumps(config))
    env = dict(os.environ)
    env.pop("TUNISENT_MODEL_DIR", None)
    proc = subprocess.run([BIN, "train", cfg2], capture_output=True,
                          text=True, env=env)
    assert proc.returncode == 3
    assert "checkpoint" in proc.stderr


def test_report_empty_dir(tmp_path):
    empty = tmp_path / "reports"
    empty.mkdir()
    out = run("report", str(empty)).stdout
    assert out == "embedding,classifier,dataset,acc,f1_micro,f1_macro\n"


def test_duplicate_report_cells_flagged(tmp_path):
    cfg, _ = train_toy(tmp_path)
    run("train", cfg)
    reports = tmp_path / "out" / "reports" / "toy"
    src = reports / "word2vec_self-cnn.json"
    (reports / "again.json").write_text(src.read_text())
    proc = run("report", str(tmp_path / "out" / "reports"))
    assert "duplicate grid cell" in proc.stderr
    assert len(proc.stdout.strip().splitlines()) == 3


def test_translit_table_flag(tmp_path):
    out = run("translit", "5dhit").stdout
    assert "خذit" in out  # 5 -> خ, dh -> ذ

    table = os.path.join(os.environ.get("TUNISENT_DATA", "data"),
                         "tunizi_table.tsv")
    if os.path.exists(table):
        out2 = run("translit", "5dhit", "--table", table).stdout
        assert out2 == out


def test_unknown_split_flag_exits_2(tmp_path):
    cfg, _ = train_toy(tmp_path)
    proc = subprocess.run([BIN, "train", cfg, "--split", "bogus"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
