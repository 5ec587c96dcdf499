import csv
import json
import shutil
from pathlib import Path

import pytest
from conftest import LISTINGS

from taintminer.cli import EXIT_FATAL, EXIT_OK, EXIT_PARTIAL, main
from taintminer.corpus import load_corpus
from taintminer.vectorizer import NON_VULNERABLE, UNKNOWN, VULNERABLE


def run(*argv) -> int:
    return main([str(a) for a in argv])


def untimed(path: Path) -> list[dict]:
    """Mined flows without the per-app wall-clock field, which varies run to run."""
    records = json.loads(path.read_text())
    for r in records:
        r.pop("elapsed_ms")
    return records


@pytest.fixture(scope="module")
def mutants(tmp_path_factory) -> Path:
    out = tmp_path_factory.mktemp("mutants")
    assert run("mutgen", "--builtin-seeds", 4, "--per-seed", 6, "--seed", 3, "--out", out) == EXIT_OK
    return out


class TestCorpusLoading:
    def test_directory_layout_labels(self, tmp_path):
        for label in (VULNERABLE, NON_VULNERABLE):
            (tmp_path / label).mkdir()
        shutil.copy(LISTINGS / "flow_vulnerable.groovy", tmp_path / VULNERABLE / "a.groovy")
        shutil.copy(LISTINGS / "flow_clean.groovy", tmp_path / NON_VULNERABLE / "b.groovy")
        shutil.copy(LISTINGS / "context.groovy", tmp_path / "c.groovy")
        assert load_corpus(tmp_path).labels() == {"a": VULNERABLE, "b": NON_VULNERABLE, "c": UNKNOWN}

    def test_manifest_wins_over_layout(self, tmp_path):
        (tmp_path / VULNERABLE).mkdir()
        shutil.copy(LISTINGS / "flow_clean.groovy", tmp_path / VULNERABLE / "a.groovy")
        (tmp_path / "manifest.csv").write_text(f"file,label\n{VULNERABLE}/a.groovy,{NON_VULNERABLE}\n")
        assert load_corpus(tmp_path).labels() == {"a": NON_VULNERABLE}

    def test_name_collisions_get_suffixes(self, tmp_path):
        for d in ("x", "y", "z"):
            (tmp_path / d).mkdir()
            shutil.copy(LISTINGS / "flow_clean.groovy", tmp_path / d / "app.groovy")
        names = [e.name for e in load_corpus(tmp_path).entries]
        assert names == ["app", "app~2", "app~3"]

    def test_manifest_errors(self, tmp_path):
        m = tmp_path / "manifest.csv"
        m.write_text("file,label\nmissing.groovy,vulnerable\n")
        with pytest.raises(FileNotFoundError):
            load_corpus(m)
        shutil.copy(LISTINGS / "flow_clean.groovy", tmp_path / "a.groovy")
        m.write_text("file,label\na.groovy,maybe\n")
        with pytest.raises(Exception, match="unknown label"):
            load_corpus(m)


class TestCommands:
    def test_mutgen_manifest(self, mutants):
        with open(mutants / "manifest.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 24
        assert {r["label"] for r in rows} == {VULNERABLE, NON_VULNERABLE}
        assert all((mutants / r["file"]).is_file() for r in rows)

    def test_pipeline_matches_individual_commands(self, mutants, tmp_path):
        pipe = tmp_path / "pipe"
        assert run("pipeline", mutants, "--min-apps", 1, "--out", pipe) == EXIT_OK
        assert run("mine", mutants, "--out", tmp_path / "flows.json") == EXIT_OK
        assert run("vectorize", mutants, "--min-apps", 1, "--out", tmp_path / "features.csv") == EXIT_OK
        assert run("evaluate", tmp_path / "features.csv", "--out", tmp_path / "eval.json") == EXIT_OK
        assert untimed(pipe / "flows.json") == untimed(tmp_path / "flows.json")
        for name in ("features.csv", "eval.json"):
            assert (pipe / name).read_bytes() == (tmp_path / name).read_bytes(), name
        assert len(list((pipe / "normalized").glob("*.groovy"))) == 24

    def test_train_evaluate_predict(self, mutants, tmp_path):
        features = tmp_path / "f.csv"
        run("vectorize", mutants, "--min-apps", 1, "--out", features)
        model = tmp_path / "m.pkl"
        assert run("train", features, "--model", "tree", "--out", model) == EXIT_OK
        assert run("evaluate", features, "--model-file", model, "--out", tmp_path / "e.json") == EXIT_OK
        assert set(json.loads((tmp_path / "e.json").read_text())) == {"tree"}
        assert run("predict", LISTINGS / "flow_vulnerable.groovy", "--model-file", model, "--out", tmp_path / "p.csv") == 0
        rows = (tmp_path / "p.csv").read_text().splitlines()
        assert rows[0] == "app,classifier,score,prediction" and len(rows) == 2

    def test_jobs_do_not_change_output(self, mutants, tmp_path):
        run("mine", mutants, "--out", tmp_path / "one.json")
        run("mine", mutants, "--jobs", 3, "--out", tmp_path / "three.json")
        assert untimed(tmp_path / "one.json") == untimed(tmp_path / "three.json")

    def test_preprocess_to_stdout(self, capsys):
        assert run("preprocess", LISTINGS / "flow_vulnerable.groovy") == EXIT_OK
        assert capsys.readouterr().out.splitlines()[-1] == "}"

    def test_bow_json_lines(self, capsys):
        assert run("bow", LISTINGS / "flow_vulnerable.groovy") == EXIT_OK
        record = json.loads(capsys.readouterr().out)
        assert record["app"] == "flow_vulnerable" and record["bow"]["sendSms"] == 1


class TestStats:
    def test_hand_counted(self, tmp_path, capsys):
        (tmp_path / VULNERABLE).mkdir()
        (tmp_path / NON_VULNERABLE).mkdir()
        shutil.copy(LISTINGS / "flow_vulnerable.groovy", tmp_path / VULNERABLE / "a.groovy")
        shutil.copy(LISTINGS / "flow_clean.groovy", tmp_path / NON_VULNERABLE / "b.groovy")
        shutil.copy(LISTINGS / "path_clean.groovy", tmp_path / NON_VULNERABLE / "c.groovy")
        assert run("stats", tmp_path) == EXIT_OK
        assert capsys.readouterr().out.splitlines() == [
            "sink,label,apps,occurrences,histogram",
            "sendPush,non-vulnerable,1,1,1:1",
            "sendSms,non-vulnerable,2,2,1:2",
            "sendSms,vulnerable,1,1,1:1",
        ]

    def test_no_sinks_gives_header_only(self, tmp_path, capsys):
        (tmp_path / "a.groovy").write_text("def f() {\n    x = 1\n}\n")
        assert run("stats", tmp_path) == EXIT_OK
        assert capsys.readouterr().out == "sink,label,apps,occurrences,histogram\n"


class TestExitCodes:
    def test_missing_sink_file(self, tmp_path):
        assert run("mine", LISTINGS / "flow_clean.groovy", "--sinks", tmp_path / "nope.txt") == EXIT_FATAL

    def test_missing_input(self, tmp_path):
        assert run("mine", tmp_path / "nope.groovy") == EXIT_FATAL

    def test_strict_reports_partial_failure(self, tmp_path):
        shutil.copy(LISTINGS / "flow_clean.groovy", tmp_path / "ok.groovy")
        (tmp_path / "bad.groovy").write_text("def f() {\n    /* open\n")
        out = tmp_path / "flows.json"
        assert run("mine", tmp_path, "--out", out) == EXIT_OK
        assert len(json.loads(out.read_text())) == 1
        assert run("mine", tmp_path, "--strict", "--out", out) == EXIT_PARTIAL

    def test_unlabeled_rows_cannot_train(self, tmp_path):
        shutil.copy(LISTINGS / "flow_clean.groovy", tmp_path / "a.groovy")
        assert run("vectorize", tmp_path, "--min-apps", 1, "--out", tmp_path / "f.csv") == EXIT_OK
        assert run("evaluate", tmp_path / "f.csv") == EXIT_FATAL

    def test_mutgen_per_seed(self, tmp_path):
        assert run("mutgen", "--builtin-seeds", 1, "--per-seed", 0, "--out", tmp_path) == EXIT_FATAL
