from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np
import pytest

import synth
from corpus_forge.cli import main
from corpus_forge.config import ENV_VAR, PipelineConfig
from corpus_forge.filters import ConfigError
from corpus_forge.metrics import write_embeddings


def write_jsonl(path: Path, rows: list[dict]) -> Path:
    path.write_text("".join(json.dumps(r, ensure_ascii=False) + "\n" for r in rows), encoding="utf-8")
    return path


@pytest.fixture
def small_corpus(tmp_path) -> Path:
    rng = np.random.default_rng(0)
    rows = [
        {"id": f"d{i}", "lang": lang, "text": synth.paragraph(lang, rng, 4) + "\n\n" + synth.paragraph(lang, rng, 3)}
        for i, lang in enumerate(["hi", "ta", "en"] * 20)
    ]
    return write_jsonl(tmp_path / "corpus.jsonl", rows)


def clean_args(fx: Path, out: Path) -> list[str]:
    return [
        "clean", "-i", str(fx / "clean_fixture.jsonl"), "-o", str(out),
        "--lid-model", str(fx / "lid_fixture.json"),
        "--blacklist", f"hi={fx / 'blacklist_hi.txt'}",
        "--blacklist", f"en={fx / 'blacklist_en.txt'}",
    ]


class TestExitCodes:
    def test_unknown_command(self, capsys):
        assert main(["frobnicate"]) == 1
        assert "usage" in capsys.readouterr().err

    def test_unknown_flag(self, capsys):
        assert main(["stats", "--nope"]) == 1

    def test_no_command(self):
        assert main([]) == 1

    def test_missing_input_is_config_error(self, tmp_path):
        assert main(["stats", "-i", str(tmp_path / "missing.jsonl")]) == 1

    def test_missing_blacklist_for_stage(self, tmp_path, fixtures_dir):
        args = ["clean", "-i", str(fixtures_dir / "clean_fixture.jsonl"), "-o", str(tmp_path / "o.jsonl"), "--stages", "offensive"]
        assert main(args) == 1

    def test_record_error_budget(self, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"id":"a","lang":"hi","text":"x"}\n{"id":\n{"id":"b","lang":"hi","text":"y"}\n')
        out = tmp_path / "stats.json"
        assert main(["stats", "-i", str(bad), "-o", str(out)]) == 2
        assert main(["stats", "-i", str(bad), "-o", str(out), "--max-record-errors", "1"]) == 0
        assert json.loads(out.read_text())["total"]["documents"] == 2
        report = json.loads((tmp_path / "stats.json.report.json").read_text())
        assert report["record_error_count"] == 1 and report["record_errors"][0]["line"] == 2


class TestCommands:
    def test_clean_fixture_report(self, tmp_path, fixtures_dir):
        out = tmp_path / "clean.jsonl"
        assert main(clean_args(fixtures_dir, out)) == 0
        report = json.loads((tmp_path / "clean.jsonl.report.json").read_text())
        f = report["counters"]["filter"]
        assert (f["paragraphs_removed_lid"], f["sentences_removed_script"], f["sentences_removed_offensive"]) == (1, 1, 1)
        assert (f["documents_removed_punctuation"], f["documents_removed_dedup"]) == (1, 1)
        assert f["documents_out"] == report["counters"]["documents_written"] == len(out.read_text().splitlines()) == 98
        assert report["wall_time_s"] >= 0 and report["parameters"]["threshold"] == 0.75

    def test_clean_with_config_file(self, tmp_path, fixtures_dir):
        cfg = tmp_path / "run.yaml"
        cfg.write_text(
            f"seed: 3\nclean:\n  input: {fixtures_dir / 'clean_fixture.jsonl'}\n  lid_model: {fixtures_dir / 'lid_fixture.json'}\n"
            f"  stages: [lid, script, punctuation, dedup]\n  min_words: 12\n"
        )
        out = tmp_path / "o.jsonl"
        assert main(["clean", "--config", str(cfg), "-o", str(out)]) == 0
        report = json.loads((tmp_path / "o.jsonl.report.json").read_text())
        assert report["parameters"]["min_words"] == 12 and report["seed"] == 3
        # flags win over the config block
        assert main(["clean", "--config", str(cfg), "-o", str(out), "--min-words", "10"]) == 0
        assert json.loads((tmp_path / "o.jsonl.report.json").read_text())["parameters"]["min_words"] == 10

    def test_stats_queries_plan(self, tmp_path, small_corpus):
        assert main(["stats", "-i", str(small_corpus), "-o", str(tmp_path / "s.json")]) == 0
        stats = json.loads((tmp_path / "s.json").read_text())
        assert set(stats["languages"]) == {"hi", "ta", "en"}
        assert main(["queries", "-i", str(small_corpus), "--lang", "ta", "-k", "4", "-o", str(tmp_path / "q.txt")]) == 0
        assert len((tmp_path / "q.txt").read_text().splitlines()) == 4
        assert main(["plan", "-i", str(small_corpus), "--alpha", "1.0", "-o", str(tmp_path / "p.json")]) == 0
        plan = json.loads((tmp_path / "p.json").read_text())
        for lang, v in plan["languages"].items():
            assert v["probability"] == stats["languages"][lang]["tokens"] / stats["total"]["tokens"]

    def test_plan_from_counts(self, tmp_path):
        (tmp_path / "c.json").write_text('{"A": 900, "B": 100}')
        assert main(["plan", "--counts", str(tmp_path / "c.json"), "-o", str(tmp_path / "p.json")]) == 0
        p = json.loads((tmp_path / "p.json").read_text())["languages"]
        assert round(p["A"]["probability"], 4) == 0.6591

    def test_lid_commands(self, tmp_path):
        rng = np.random.default_rng(1)
        train = write_jsonl(tmp_path / "t.jsonl", [{"id": str(i), "lang": l, "text": synth.paragraph(l, rng, 3)} for i, l in enumerate(["hi", "ta"] * 10)])
        assert main(["lid-train", "-i", str(train), "-o", str(tmp_path / "m.json")]) == 0
        assert main(["lid-eval", "--model", str(tmp_path / "m.json"), "-i", str(train), "-o", str(tmp_path / "e.json")]) == 0
        assert json.loads((tmp_path / "e.json").read_text())["accuracy"] == {"hi": 100.0, "ta": 100.0}
        doc = write_jsonl(tmp_path / "d.jsonl", [{"id": "x", "lang": "hi", "text": synth.paragraph("hi", rng, 2) + "\n\n" + synth.paragraph("ta", rng, 2)}])
        assert main(["lid-filter", "--model", str(tmp_path / "m.json"), "-i", str(doc), "-o", str(tmp_path / "f.jsonl")]) == 0
        assert len(json.loads((tmp_path / "f.jsonl").read_text())["paragraphs"]) == 1

    def test_dedup(self, tmp_path):
        src = write_jsonl(tmp_path / "d.jsonl", [{"id": "a", "lang": "hi", "text": "x  y"}, {"id": "b", "lang": "hi", "text": "x y"}])
        assert main(["dedup", "-i", str(src), "-o", str(tmp_path / "o.jsonl")]) == 0
        assert len((tmp_path / "o.jsonl").read_text().splitlines()) == 1

    def test_to_deva(self, tmp_path):
        (tmp_path / "b.txt").write_text("অ க", encoding="utf-8")
        assert main(["to-deva", "-i", str(tmp_path / "b.txt"), "--script", "Beng", "-o", str(tmp_path / "d.txt")]) == 0
        assert (tmp_path / "d.txt").read_text(encoding="utf-8") == "अ க"
        assert main(["to-deva", "-i", str(tmp_path / "b.txt"), "--script", "Latn"]) == 1

    def test_vocab_tokenize_fertility_mlm_tlm(self, tmp_path, small_corpus):
        shards = tmp_path / "shards"
        assert main(["sample", "-i", str(small_corpus), "-o", str(shards), "--target-tokens", "5000", "--seed", "1"]) == 0
        shard = shards / "shard-00000.txt"
        assert shard.read_text(encoding="utf-8").startswith("<")
        vocab = tmp_path / "v.txt"
        assert main(["vocab-train", "-i", str(shard), "-o", str(vocab), "--vocab-size", "700"]) == 0
        pieces = vocab.read_text(encoding="utf-8").splitlines()
        assert len(pieces) <= 700 and "<" not in pieces
        assert main(["tokenize", "--vocab", str(vocab), "-i", str(shard), "-o", str(tmp_path / "tok.txt")]) == 0
        assert main(["fertility", "--vocab", str(vocab), "-i", str(small_corpus), "-o", str(tmp_path / "f.json")]) == 0
        assert set(json.loads((tmp_path / "f.json").read_text())) == {"hi", "ta", "en"}
        assert main(["mlm-build", "--vocab", str(vocab), "-i", str(shard), "-o", str(tmp_path / "mlm.jsonl"), "--max-len", "64"]) == 0
        rows = [json.loads(l) for l in (tmp_path / "mlm.jsonl").open()]
        assert all(r["length"] <= 64 and r["input_ids"][0] == pieces.index("[CLS]") for r in rows)
        pairs = write_jsonl(tmp_path / "p.jsonl", [{"id": "1", "src": "नमस्ते", "tgt": "hello"}, {"id": "2", "src": ""}])
        assert main(["tlm-build", "--vocab", str(vocab), "-i", str(pairs), "-o", str(tmp_path / "tlm.jsonl")]) == 2
        assert len((tmp_path / "tlm.jsonl").read_text().splitlines()) == 1

    def test_score_tasks(self, tmp_path, capsys):
        qa = write_jsonl(tmp_path / "qa.jsonl", [{"id": 1, "gold": ["New Delhi"], "pred": "Delhi"}])
        assert main(["score", "qa", "-i", str(qa), "-o", str(tmp_path / "qa.json")]) == 0
        assert json.loads((tmp_path / "qa.json").read_text())["score"] == pytest.approx(200 / 3)
        ner = write_jsonl(tmp_path / "ner.jsonl", [{"id": 1, "gold": ["B-PER", "I-PER", "O", "B-LOC"], "pred": ["B-PER", "I-PER", "O", "O"]}])
        assert main(["score", "ner", "-i", str(ner), "-o", str(tmp_path / "ner.json")]) == 0
        assert json.loads((tmp_path / "ner.json").read_text())["score"] == pytest.approx(200 / 3)
        acc = write_jsonl(tmp_path / "a.jsonl", [{"id": i, "gold": i % 2, "pred": 0} for i in range(4)])
        assert main(["score", "sentiment", "-i", str(acc), "-o", str(tmp_path / "a.json")]) == 0
        assert json.loads((tmp_path / "a.json").read_text())["score"] == 50.0
        m = np.random.default_rng(0).normal(size=(10, 4))
        write_embeddings(tmp_path / "s.bin", m)
        write_embeddings(tmp_path / "t.bin", m)
        assert main(["score", "retrieval", "--src", str(tmp_path / "s.bin"), "--tgt", str(tmp_path / "t.bin"), "-o", str(tmp_path / "r.json")]) == 0
        assert json.loads((tmp_path / "r.json").read_text())["score"] == 100.0
        assert main(["score", "nonsense", "-i", str(acc)]) == 1

    def test_score_duplicate_ids(self, tmp_path):
        acc = write_jsonl(tmp_path / "a.jsonl", [{"id": 1, "gold": 1, "pred": 1}, {"id": 1, "gold": 1, "pred": 0}])
        assert main(["score", "xnli", "-i", str(acc), "-o", str(tmp_path / "a.json")]) == 2

    def test_aggregate_paper_tables(self, tmp_path, capsys):
        from conftest import DATA

        tables = json.loads((DATA / "indicxtreme_tables.json").read_text())
        by_model: dict = {}
        for task in ("sentiment", "xnli"):
            for model, row in tables[task].items():
                by_model.setdefault(model, {})[task] = row["scores"]
        (tmp_path / "t.json").write_text(json.dumps(by_model))
        assert main(["aggregate", "-i", str(tmp_path / "t.json"), "-o", str(tmp_path / "agg.json")]) == 0
        agg = json.loads((tmp_path / "agg.json").read_text())
        for task in ("sentiment", "xnli"):
            for model, row in tables[task].items():
                assert abs(agg[model]["task_averages"][task] - row["avg"]) <= 0.05 + 1e-9
        assert "Avg." in capsys.readouterr().err


class TestDeterminism:
    def test_seeded_commands_byte_identical(self, tmp_path, small_corpus):
        def run(tag: str) -> list[bytes]:
            d = tmp_path / tag
            d.mkdir()
            assert main(["sample", "-i", str(small_corpus), "-o", str(d / "sh"), "--target-tokens", "3000", "--seed", "4"]) == 0
            assert main(["vocab-train", "-i", str(d / "sh" / "shard-00000.txt"), "-o", str(d / "v.txt"), "--vocab-size", "600", "--fraction", "0.7", "--seed", "4"]) == 0
            assert main(["mlm-build", "--vocab", str(d / "v.txt"), "-i", str(d / "sh" / "shard-00000.txt"), "-o", str(d / "m.jsonl"), "--seed", "4"]) == 0
            return [(d / p).read_bytes() for p in ("sh/shard-00000.txt", "v.txt", "m.jsonl")]

        assert run("a") == run("b")


class TestConfig:
    def test_precedence(self, tmp_path):
        cfg = tmp_path / "c.yaml"
        cfg.write_text("seed: 1\nalpha: 0.5\nplan:\n  alpha: 0.3\n")
        c = PipelineConfig.load("plan", cfg)
        assert c.resolve("alpha", None) == 0.3
        assert c.resolve("alpha", 0.9) == 0.9
        assert c.resolve("seed", None) == 1
        assert c.resolve("missing", None, "d") == "d"
        assert PipelineConfig.load("sample", cfg).resolve("alpha", None) == 0.5

    def test_env_var(self, tmp_path, monkeypatch):
        cfg = tmp_path / "c.yaml"
        cfg.write_text("seed: 42\n")
        monkeypatch.setenv(ENV_VAR, str(cfg))
        assert PipelineConfig.load("stats").resolve("seed", None) == 42

    def test_relative_paths(self, tmp_path):
        (tmp_path / "sub").mkdir()
        (tmp_path / "sub" / "in.jsonl").write_text("")
        cfg = tmp_path / "sub" / "c.yaml"
        cfg.write_text("stats:\n  input: in.jsonl\n  output: out.json\n")
        c = PipelineConfig.load("stats", cfg)
        assert c.path_value("input", None) == tmp_path / "sub" / "in.jsonl"
        assert c.path_value("output", None, must_exist=False) == tmp_path / "sub" / "out.json"

    @pytest.mark.parametrize("text", ["- a\n- b\n", "x: [unclosed\n", "plan: 3\n"])
    def test_invalid(self, tmp_path, text):
        cfg = tmp_path / "c.yaml"
        cfg.write_text(text)
        with pytest.raises(ConfigError):
            PipelineConfig.load("plan", cfg)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            PipelineConfig.load("plan", tmp_path / "nope.yaml")
