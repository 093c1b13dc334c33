from __future__ import annotations

from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import synth
from corpus_forge import languages
from corpus_forge.corpus import CleanDocument
from corpus_forge.lid import (
    LID_SKIPPED,
    UNKNOWN,
    LidModel,
    LidTrainingError,
    evaluate_lid,
    filter_paragraphs,
    train_lid,
)

TAMIL_LETTERS = [chr(c) for c in range(0x0B85, 0x0BB9) if chr(c).isalpha()]


@pytest.fixture(scope="module")
def model24() -> LidModel:
    samples = [(lang, synth.text_of_size(lang, 3000, seed=1)) for lang in languages.CODES if lang not in ("brx", "doi")]
    return train_lid(samples)


@pytest.fixture(scope="module")
def model2() -> LidModel:
    return train_lid([("hi", synth.text_of_size("hi", 2000, 1)), ("ta", synth.text_of_size("ta", 2000, 2))])


class TestTraining:
    def test_single_language(self):
        m = train_lid([("ta", "தமிழ் மொழி")], min_letters=1)
        assert m.predict("கடல் அலை").lang == "ta"

    def test_disjoint_scripts_held_in(self, model2):
        rng = np.random.default_rng(1)
        for lang in ("hi", "ta"):
            text = synth.text_of_size(lang, 2000, 1 if lang == "hi" else 2)
            assert model2.predict(text).lang == lang
            for _ in range(20):
                assert model2.predict(synth.paragraph(lang, rng, 2)).lang == lang

    def test_duplicate_samples_same_predictions(self):
        base = [("hi", synth.text_of_size("hi", 800, 3)), ("mr", synth.text_of_size("mr", 800, 4)), ("ne", synth.text_of_size("ne", 800, 5))]
        once = train_lid(base)
        twice = train_lid(base + base)
        rng = np.random.default_rng(9)
        for _ in range(50):
            lang = ["hi", "mr", "ne"][int(rng.integers(3))]
            text = synth.paragraph(lang, rng, 2)
            assert once.scores(text) == twice.scores(text)

    def test_scaling_one_language_keeps_argmax(self):
        m = train_lid([("hi", synth.text_of_size("hi", 800, 3)), ("mr", synth.text_of_size("mr", 800, 4))])
        scaled = LidModel(
            m.n,
            m.smoothing,
            m.min_letters,
            {"hi": Counter({g: 7 * c for g, c in m.ngram_counts["hi"].items()}), "mr": m.ngram_counts["mr"]},
            {"hi": Counter({s: 7 * c for s, c in m.script_counts["hi"].items()}), "mr": m.script_counts["mr"]},
        )
        rng = np.random.default_rng(11)
        for _ in range(60):
            text = synth.paragraph(["hi", "mr"][int(rng.integers(2))], rng, 2)
            assert scaled.predict(text).lang == m.predict(text).lang

    def test_language_without_characters(self):
        with pytest.raises(LidTrainingError, match="ta"):
            train_lid([("hi", "नमस्ते दुनिया")], languages_declared=["hi", "ta"])
        with pytest.raises(LidTrainingError, match="hi"):
            train_lid([("hi", "123 ...")])

    def test_bad_order(self):
        with pytest.raises(ValueError):
            train_lid([("hi", "नमस्ते")], n=5)

    def test_unknown_language_code(self):
        with pytest.raises(languages.UnknownLanguageError):
            train_lid([("zz", "abc")])


class TestPredict:
    def test_pure_tamil(self, model24):
        assert model24.predict("தமிழ்நாட்டின் தலைநகரம் சென்னை ஆகும் இது ஒரு பெரிய நகரம்").lang == "ta"

    def test_short_text_unknown(self, model24):
        assert model24.predict("नमस्ते").lang == UNKNOWN

    def test_digits_only_unknown(self, model24):
        p = model24.predict("123 456 789 !!! 2024-01-01 3.14159 ... 42")
        assert p.is_unknown

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.text(alphabet=st.sampled_from(TAMIL_LETTERS), min_size=1, max_size=8), min_size=5, max_size=12))
    def test_unique_script_text_goes_to_its_language(self, model24, words):
        text = " ".join(words)
        if len(text.replace(" ", "")) < model24.min_letters:
            return
        assert model24.predict(text).lang == "ta"

    @pytest.mark.parametrize("lang", languages.unique_script_languages())
    def test_unique_script_languages(self, model24, lang):
        rng = np.random.default_rng(5)
        for _ in range(10):
            assert model24.predict(synth.paragraph(lang, rng, 2)).lang == lang

    def test_min_margin_yields_unknown(self):
        m = train_lid([("hi", synth.text_of_size("hi", 500, 1)), ("mr", synth.text_of_size("mr", 500, 2))], min_margin=1e9)
        assert m.predict(synth.text_of_size("hi", 200, 3)).is_unknown


class TestSerialization:
    def test_roundtrip_bitwise(self, model24, tmp_path):
        model24.save(tmp_path / "m.json")
        loaded = LidModel.load(tmp_path / "m.json")
        rng = np.random.default_rng(2)
        for lang in ("hi", "ta", "ur", "en", "sat"):
            text = synth.paragraph(lang, rng, 2)
            assert loaded.scores(text) == model24.scores(text)
        loaded.save(tmp_path / "n.json")
        assert (tmp_path / "m.json").read_bytes() == (tmp_path / "n.json").read_bytes()

    def test_rejects_other_formats(self):
        with pytest.raises(ValueError):
            LidModel.from_json({"format": "x"})


class TestFilterParagraphs:
    def test_drops_foreign_paragraph(self, model2):
        rng = np.random.default_rng(4)
        doc = CleanDocument("d", "hi", [synth.paragraph("hi", rng, 2), synth.paragraph("ta", rng, 2), synth.paragraph("hi", rng, 2)])
        out = filter_paragraphs(model2, doc)
        assert out.paragraphs == [doc.paragraphs[0], doc.paragraphs[2]]

    def test_unsupported_language_passes_untouched(self, model2):
        rng = np.random.default_rng(4)
        doc = CleanDocument("d", "brx", [synth.paragraph("ta", rng, 2), "hello"])
        out = filter_paragraphs(model2, doc)
        assert out.paragraphs == doc.paragraphs
        assert out.provenance == [LID_SKIPPED]
        assert doc.provenance == []

    def test_all_foreign_empties_document(self, model2):
        rng = np.random.default_rng(4)
        doc = CleanDocument("d", "hi", [synth.paragraph("ta", rng, 2)])
        assert filter_paragraphs(model2, doc).paragraphs == []

    def test_unknown_paragraphs_kept(self, model2):
        doc = CleanDocument("d", "hi", ["ok", "12345"])
        assert filter_paragraphs(model2, doc).paragraphs == ["ok", "12345"]


class TestEvaluate:
    def test_memorized_training_data(self, model2):
        test = [("hi", synth.text_of_size("hi", 2000, 1)), ("ta", synth.text_of_size("ta", 2000, 2))]
        assert evaluate_lid(model2, test).accuracy == {"hi": 1.0, "ta": 1.0}

    def test_mislabeled_item(self, model2):
        test = [("hi", synth.text_of_size("ta", 300, 1)), ("ta", synth.text_of_size("ta", 300, 2))]
        report = evaluate_lid(model2, test)
        assert report.accuracy == {"hi": 0.0, "ta": 1.0}
        assert sum(report.confusion["hi"].values()) == 1

    def test_absent_language_reported_as_none(self, model2):
        report = evaluate_lid(model2, [("ta", synth.text_of_size("ta", 300, 2))], languages_reported=["hi"])
        assert report.accuracy["hi"] is None
        assert report.to_json()["accuracy"] == {"hi": None, "ta": 100.0}

    def test_unsupported_label(self, model2):
        with pytest.raises(ValueError):
            evaluate_lid(model2, [("bn", "x")])
