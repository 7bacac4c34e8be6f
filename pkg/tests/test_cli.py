import json

import pandas as pd
import pytest

import fairauc.cli as cli
from fairauc.bounds import LemmaReport
from fairauc.cli import main


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "g.csv"
    assert main(["synth", "--kind", "guyon", "--n", "3000", "--n-features", "12",
                 "--n-informative", "6", "--seed", "1", "--out", str(path)]) == 0
    return path


def error_line(capsys):
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1
    return json.loads(err[0])


class TestSynth:
    @pytest.mark.parametrize("kind", ["gamma1", "gamma2"])
    def test_gamma(self, tmp_path, kind):
        out = tmp_path / "x.csv"
        assert main(["synth", "--kind", kind, "--n", "500", "--out", str(out)]) == 0
        frame = pd.read_csv(out)
        assert frame.shape == (500, 52)
        assert set(frame["group"]) <= {"a", "b"}


class TestAcquire:
    def test_outputs(self, dataset, tmp_path):
        out, table = tmp_path / "r.json", tmp_path / "r.csv"
        rc = main(["acquire", "--data", str(dataset), "--rounds", "3", "--bootstrap", "20",
                   "--owned", "x0", "--out", str(out), "--csv", str(table)])
        assert rc == 0
        rep = json.loads(out.read_text())
        assert rep["owned"] == [0]
        assert len(rep["records"]) == len(pd.read_csv(table))

    def test_deterministic(self, dataset, tmp_path):
        args = ["acquire", "--data", str(dataset), "--rounds", "3", "--bootstrap", "50",
                "--strategy", "random"]
        main(args + ["--out", str(tmp_path / "a.json")])
        main(args + ["--out", str(tmp_path / "b.json")])
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_seed_env_and_flag(self, dataset, tmp_path, monkeypatch):
        monkeypatch.setenv("FAIRAUC_SEED", "17")
        main(["acquire", "--data", str(dataset), "--rounds", "0", "--bootstrap", "0",
              "--out", str(tmp_path / "e.json")])
        assert json.loads((tmp_path / "e.json").read_text())["config"]["seed"] == 17
        main(["acquire", "--data", str(dataset), "--rounds", "0", "--bootstrap", "0",
              "--seed", "4", "--out", str(tmp_path / "f.json")])
        assert json.loads((tmp_path / "f.json").read_text())["config"]["seed"] == 4

    def test_aux_file(self, dataset, tmp_path):
        frame = pd.read_csv(dataset)
        frame[["x0", "group", "label"]].to_csv(tmp_path / "own.csv", index=False)
        frame[[f"x{j}" for j in range(1, 12)]].to_csv(tmp_path / "aux.csv", index=False)
        out = tmp_path / "r.json"
        assert main(["acquire", "--data", str(tmp_path / "own.csv"), "--aux",
                     str(tmp_path / "aux.csv"), "--rounds", "2", "--bootstrap", "0",
                     "--out", str(out)]) == 0
        assert json.loads(out.read_text())["config"]["owned"] == ["x0"]

    def test_missing_file(self, capsys):
        assert main(["acquire", "--data", "/nonexistent/file.csv"]) == 1
        assert error_line(capsys)["error"] == "DataError"

    def test_unknown_column(self, dataset, capsys):
        assert main(["acquire", "--data", str(dataset), "--owned", "nope", "--bootstrap", "0"]) == 1
        assert "nope" in error_line(capsys)["message"]

    def test_bad_env_seed(self, dataset, monkeypatch, capsys):
        monkeypatch.setenv("FAIRAUC_SEED", "abc")
        assert main(["acquire", "--data", str(dataset)]) == 1
        error_line(capsys)

    def test_sweep(self, dataset, tmp_path):
        out = tmp_path / "s.json"
        assert main(["sweep", "--data", str(dataset), "--rounds", "2", "--weights", "0,1",
                     "--out", str(out)]) == 0
        assert [row["weight"] for row in json.loads(out.read_text())["pareto"]] == [0.0, 1.0]


class TestVerify:
    def test_passes(self, tmp_path):
        out = tmp_path / "v.json"
        assert main(["verify", "--instances", "20", "--noise-instances", "10",
                     "--out", str(out)]) == 0
        summary = json.loads(out.read_text())
        assert summary["guarantee"]["violations"] == []
        assert summary["lemmas"]["violations"] == []

    def test_violation_exit_code(self, monkeypatch, capsys):
        monkeypatch.setattr(cli, "lemma_checks",
                            lambda: LemmaReport(1, 1, 0.0, -1.0, [("change", 0.1, 0.1, 0.1, 0.1)]))
        assert main(["verify", "--instances", "1", "--noise-instances", "1"]) == 2
        assert error_line(capsys)["error"] == "BoundViolation"
