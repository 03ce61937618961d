import csv
import hashlib
import json
from pathlib import Path

import pytest

from propdmg import cli

ROOT = Path(__file__).resolve().parents[1]


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def tree_digest(directory):
    h = {}
    for p in sorted(Path(directory).rglob("*")):
        if p.is_file():
            h[str(p.relative_to(directory))] = hashlib.sha256(p.read_bytes()).hexdigest()
    return h


@pytest.fixture(scope="module")
def work(tmp_path_factory):
    """A short synthetic corpus pushed through features, train and infer."""
    d = tmp_path_factory.mktemp("cli")
    cfg = d / "fast.toml"
    cfg.write_text('[train]\nsvm_max_iter = 100\nepochs = 3\n[study]\nrepeats = 1\n')
    assert cli.main(["synth", "--duration", "5", "--out", str(d / "corpus"), "--seed", "3"]) == 0
    assert cli.main(["features", "--corpus", str(d / "corpus"), "--out", str(d / "feat.csv")]) == 0
    assert cli.main(["train", "--config", str(cfg), "--features", str(d / "feat.csv"), "--out", str(d / "model"), "--plots"]) == 0
    return d


def test_synth_writes_corpus(work):
    csvs = sorted((work / "corpus").glob("*.csv"))
    assert len(csvs) == 72
    assert len(list((work / "corpus").glob("*.meta.json"))) == 72
    meta = json.loads((work / "corpus" / "symm_20-20.rot1.meta.json").read_text())
    assert meta["motor"] == 2
    assert meta["provenance"]["seed"] == 3


def test_train_artifacts(work):
    names = {p.name for p in (work / "model").iterdir()}
    assert {"cascade.json", "type_svm.json", "tipcut_nn.json", "long_loc_svm.json", "standardizer.json", "loss.svg"} <= names
    prov = json.loads((work / "model" / "cascade.json").read_text())["provenance"]
    assert len(prov["config_sha256"]) == 64
    assert "date" not in json.dumps(prov).lower()


def test_features_bw7_column_count(work, capsys):
    code, out, _ = run(capsys, "features", "--corpus", work / "corpus", "--out", work / "feat7.csv", "--bw", "7", "--json")
    assert code == 0
    doc = json.loads(out)
    assert doc["features"] == 172
    rows = [r for r in csv.reader(open(work / "feat7.csv")) if not r[0].startswith("#")]
    assert len(rows[0]) == 172 + 7
    assert len(rows) - 1 == doc["rows"] == 72 * 28
    assert open(work / "feat7.csv").readline().startswith("# provenance {")


def test_infer_and_eval(work, capsys, tmp_path):
    log = work / "corpus" / "healthy_0-0.rot0.csv"
    code, out, _ = run(capsys, "infer", "--model", work / "model", "--log", log, "--out", tmp_path / "d.csv", "--json")
    assert code == 0
    assert json.loads(out)["windows"] == 28
    lines = (tmp_path / "d.csv").read_text().splitlines()
    assert lines[0].startswith("# provenance") and len(lines) == 30
    code, out, _ = run(capsys, "eval", "--model", work / "model", "--features", work / "feat.csv", "--out", tmp_path / "ev", "--json")
    assert code == 0
    assert "type_accuracy" in json.loads(out)
    for stem in ("type_by_damage_test", "type_by_damage_all", "type_confusion", "tipcut_localization", "long_regression"):
        assert (tmp_path / "ev" / f"{stem}.csv").exists()
        assert (tmp_path / "ev" / f"{stem}.txt").exists()


def test_reruns_are_byte_identical(work, tmp_path):
    cfg = work / "fast.toml"
    for tag in ("a", "b"):
        assert cli.main(["synth", "--duration", "2", "--no-augment", "--out", str(tmp_path / tag / "c"), "--seed", "8"]) == 0
        assert cli.main(["features", "--corpus", str(tmp_path / tag / "c"), "--out", str(tmp_path / tag / "f.csv")]) == 0
        assert cli.main(["train", "--config", str(cfg), "--features", str(work / "feat.csv"), "--out", str(tmp_path / tag / "m"), "--plots"]) == 0
        assert cli.main(["infer", "--model", str(tmp_path / tag / "m"), "--log", str(work / "corpus" / "long_40-40.rot2.csv"), "--out", str(tmp_path / tag / "d.csv")]) == 0
    assert tree_digest(tmp_path / "a") == tree_digest(tmp_path / "b")


def test_inputs_not_mutated(work, tmp_path):
    before = tree_digest(work / "corpus"), tree_digest(work / "model"), hashlib.sha256((work / "feat.csv").read_bytes()).hexdigest()
    assert cli.main(["augment", "--corpus", str(work / "corpus"), "--out", str(tmp_path / "aug")]) == 0
    assert cli.main(["split", "--features", str(work / "feat.csv"), "--out", str(tmp_path / "s.csv"), "--seed", "4"]) == 0
    assert cli.main(["infer", "--model", str(work / "model"), "--log", str(work / "corpus" / "healthy_0-0.rot0.csv"), "--out", str(tmp_path / "x.csv")]) == 0
    after = tree_digest(work / "corpus"), tree_digest(work / "model"), hashlib.sha256((work / "feat.csv").read_bytes()).hexdigest()
    assert before == after


def test_augment_and_ingest(work, tmp_path, capsys):
    run(capsys, "synth", "--duration", "2", "--no-augment", "--out", tmp_path / "c")
    assert len(list((tmp_path / "c").glob("*.csv"))) == 18
    code, out, _ = run(capsys, "augment", "--corpus", tmp_path / "c", "--out", tmp_path / "a", "--json")
    assert code == 0 and json.loads(out) == {"flights_in": 18, "flights_out": 72}
    code, out, _ = run(capsys, "ingest", "--src", tmp_path / "c", "--out", tmp_path / "i", "--json")
    assert code == 0 and json.loads(out)["invalid"] == []
    assert (tmp_path / "i" / "validation.json").exists()


def test_split_fractions(work, tmp_path, capsys):
    code, out, _ = run(capsys, "split", "--features", work / "feat.csv", "--out", tmp_path / "s.csv", "--json")
    assert code == 0
    counts = json.loads(out)
    n = 72 * 28
    assert counts["train"] == round(0.4 * n) and counts["val"] == round(0.3 * n)


def test_studies(work, tmp_path, capsys):
    cfg = work / "fast.toml"
    code, out, _ = run(capsys, "importance", "--config", cfg, "--model", work / "model", "--features", work / "feat.csv", "--out", tmp_path, "--json")
    assert code == 0 and len(json.loads(out)["top"]) == 15
    assert (tmp_path / "importance_type.svg").exists()
    code, out, _ = run(capsys, "ablate", "--config", cfg, "--features", work / "feat.csv", "--out", tmp_path, "--json")
    assert code == 0 and json.loads(out)["rows"][0][0] == "full"
    code, out, _ = run(capsys, "loo", "--config", cfg, "--features", work / "feat.csv", "--out", tmp_path, "--json")
    assert code == 0 and (tmp_path / "loo_20-20.csv").exists()
    code, out, _ = run(capsys, "bandstudy", "--config", cfg, "--corpus", work / "corpus", "--out", tmp_path, "--widths", "5", "10", "--json")
    assert code == 0
    assert [r[1] for r in json.loads(out)["rows"]] == [232, 122]
    svg = (tmp_path / "bandstudy.svg").read_text()
    assert "<svg" in svg and "Date" not in svg


def test_usage_error_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate"])
    assert exc.value.code == 2
    err = capsys.readouterr().err.strip()
    assert json.loads(err)["error"] == "usage"


def test_config_error_exit_3(capsys, tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("[train]\nlearning_rate = 3\n")
    code, _, err = run(capsys, "synth", "--config", bad, "--out", tmp_path / "c")
    assert code == 3
    doc = json.loads(err.strip())
    assert doc["error"] == "config" and "learning_rate" in doc["message"]
    code, _, _ = run(capsys, "features", "--bw", "9", "--corpus", tmp_path, "--out", tmp_path / "f.csv")
    assert code == 3
    code, _, _ = run(capsys, "features", "--corpus", tmp_path / "nowhere", "--out", tmp_path / "f.csv")
    assert code == 3
    (tmp_path / "broken.toml").write_text("[train\n")
    assert run(capsys, "synth", "--config", tmp_path / "broken.toml")[0] == 3


def test_data_error_exit_4(capsys, tmp_path):
    (tmp_path / "junk.csv").write_text("a,b\n1,2\n")
    code, _, err = run(capsys, "train", "--features", tmp_path / "junk.csv", "--out", tmp_path / "m")
    assert code == 4
    assert len(err.strip().splitlines()) == 1 and json.loads(err)["error"] == "data"


def test_numeric_error_exit_5(capsys, monkeypatch, tmp_path):
    from propdmg.errors import NumericError

    def boom(args, cfg):
        raise NumericError("loss diverged")

    monkeypatch.setattr(cli, "cmd_synth", boom)
    code, _, err = run(capsys, "synth", "--out", tmp_path)
    assert code == 5 and json.loads(err)["error"] == "numeric"


def test_default_toml_mirrors_builtin_defaults():
    cfg = cli._load_toml(ROOT / "default.toml")
    assert cfg == cli.DEFAULTS


def test_help_lists_defaults(capsys):
    with pytest.raises(SystemExit):
        cli.main(["train", "--help"])
    out = capsys.readouterr().out
    for flag in ("--epochs", "--lr", "--C", "--tol", "--batch-size", "--seed"):
        assert flag in out
    assert "(default: 200)" in out and "(default: 0.1)" in out
