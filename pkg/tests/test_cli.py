import json
import shutil
from pathlib import Path

import pytest

from newsrec.cli import CliError, load_config, main

REPO = Path(__file__).resolve().parent.parent
SMOKE = REPO / "configs" / "smoke.json"


def smoke_config(tmp_path, **overrides):
    cfg = json.loads(SMOKE.read_text())
    cfg["out"] = str(tmp_path / "run")
    cfg.update(overrides)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg), encoding="utf-8")
    return path


def run(*argv):
    return main(list(argv))


@pytest.fixture(scope="module")
def chain(tmp_path_factory):
    """One full CLI chain on the smoke config."""
    tmp_path = tmp_path_factory.mktemp("chain")
    cfg = smoke_config(tmp_path)
    for cmd in ("generate", "train", "run", "evaluate", "compare"):
        assert run(cmd, "--config", str(cfg)) == 0, cmd
    return tmp_path / "run", cfg


class TestChain:
    def test_artifacts_exist_and_nonempty(self, chain):
        out, _ = chain
        expected = [
            "corpus/articles.jsonl", "corpus/events.jsonl", "corpus/vectors.txt",
            "models/schema.json", "emissions_baseline.jsonl",
            "emissions_dynamism.jsonl", "manual.jsonl",
            "reports/accuracy.json", "reports/accuracy.txt", "reports/metrics.csv",
            "reports/compare_ab.json", "reports/compare_manual.json",
        ]
        for rel in expected:
            path = out / rel
            assert path.exists() and path.stat().st_size > 0, rel
        assert list((out / "models").glob("model_*.json"))

    def test_reports_parse(self, chain):
        out, _ = chain
        acc = json.loads((out / "reports" / "accuracy.json").read_text())
        assert 0.0 <= acc["ndcg"] <= 1.0
        assert acc["n_user_days"] > 0
        ab = json.loads((out / "reports" / "compare_ab.json").read_text())
        assert any(r["metric"] == "dynamism" for r in ab)
        for r in ab:
            assert 0.0 <= r["p_value"] <= 1.0

    def test_evaluate_idempotent_byte_identical(self, chain):
        out, cfg = chain
        before = {p: p.read_bytes() for p in (out / "reports").glob("accuracy.*")}
        assert run("evaluate", "--config", str(cfg)) == 0
        for p, blob in before.items():
            assert p.read_bytes() == blob


class TestErrors:
    def test_missing_upstream_artifact_named(self, tmp_path, capsys):
        cfg = smoke_config(tmp_path)
        assert run("train", "--config", str(cfg)) == 2
        err = capsys.readouterr().err
        assert "articles.jsonl" in err

    def test_missing_config_file(self, tmp_path, capsys):
        assert run("generate", "--config", str(tmp_path / "nope.json")) == 2
        assert "not found" in capsys.readouterr().err

    def test_config_validation_lists_all_problems(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({
            "world": {"n_users": 0},
            "corpus": {"articles": "a", "events": "e", "vectors": "v"},
            "treatments": ["nope"],
        }), encoding="utf-8")
        with pytest.raises(CliError) as exc:
            load_config(bad)
        msg = str(exc.value)
        assert "exactly one" in msg
        assert "n_users" in msg
        assert "nope" in msg
        assert "'out'" in msg

    def test_generate_requires_world(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "out": str(tmp_path / "o"),
            "corpus": {"articles": "a.jsonl", "events": "e.jsonl", "vectors": "v.txt"},
        }), encoding="utf-8")
        assert run("generate", "--config", str(cfg)) == 2
        assert "world" in capsys.readouterr().err


class TestSeedOverride:
    def test_seed_changes_generated_corpus(self, tmp_path):
        cfg = smoke_config(tmp_path)
        out = tmp_path / "run"
        assert run("generate", "--config", str(cfg)) == 0
        first = (out / "corpus" / "events.jsonl").read_bytes()
        assert run("generate", "--config", str(cfg), "--seed", "8") == 0
        assert (out / "corpus" / "events.jsonl").read_bytes() != first
        assert run("generate", "--config", str(cfg)) == 0
        assert (out / "corpus" / "events.jsonl").read_bytes() == first
