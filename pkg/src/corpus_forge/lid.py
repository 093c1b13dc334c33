"""Character n-gram language identifier with per-language script priors.

Each language is modelled by a smoothed distribution over character n-grams
and a smoothed distribution over the scripts of its letters. A text is scored
as the sum of its n-gram log-likelihood and the script log-likelihood of its
letters; the best scoring language wins.

Smoothing is additive, but applied to relative frequencies rescaled to a fixed
reference mass rather than to raw counts. Multiplying every count of a
language by a constant therefore leaves its distributions, and every
prediction, exactly unchanged.
"""

from __future__ import annotations

import json
import math
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from . import languages
from .corpus import CleanDocument
from .scripts import SCRIPTS, letter_script

FORMAT = "corpus-forge-lid"
VERSION = 1
UNKNOWN = "unk"
REFERENCE_MASS = 10_000.0


class LidTrainingError(ValueError):
    pass


def _normalize(text: str) -> str:
    return " " + " ".join(unicodedata.normalize("NFC", text).casefold().split()) + " "


def char_ngrams(text: str, n: int) -> Counter:
    t = _normalize(text)
    return Counter(t[i : i + n] for i in range(len(t) - n + 1))


def letter_scripts(text: str) -> Counter:
    counts: Counter = Counter()
    for ch in text:
        s = letter_script(ch)
        if s is not None:
            counts[s] += 1
    return counts


@dataclass(frozen=True)
class Prediction:
    lang: str
    score: float

    @property
    def is_unknown(self) -> bool:
        return self.lang == UNKNOWN


@dataclass
class _Table:
    logp: dict[str, float]
    unseen: float


def _smoothed(counts: Counter, support: int, k: float) -> _Table:
    total = sum(counts.values())
    denom = 1.0 + k * support / REFERENCE_MASS
    logp = {g: math.log((c / total + k / REFERENCE_MASS) / denom) for g, c in counts.items()}
    return _Table(logp, math.log((k / REFERENCE_MASS) / denom))


@dataclass
class LidModel:
    n: int
    smoothing: float
    min_letters: int
    ngram_counts: dict[str, Counter]
    script_counts: dict[str, Counter]
    min_margin: float = 0.0
    _ngram_tables: dict[str, _Table] = field(default_factory=dict, repr=False, compare=False)
    _script_tables: dict[str, _Table] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        vocab: set[str] = set()
        for c in self.ngram_counts.values():
            vocab.update(c)
        support = len(vocab) + 1
        for lang in sorted(self.ngram_counts):
            self._ngram_tables[lang] = _smoothed(self.ngram_counts[lang], support, self.smoothing)
            self._script_tables[lang] = _smoothed(self.script_counts[lang], len(SCRIPTS), self.smoothing)

    @property
    def supported(self) -> frozenset[str]:
        return frozenset(self.ngram_counts)

    def scores(self, text: str) -> dict[str, float]:
        grams = char_ngrams(text, self.n)
        scripts = letter_scripts(text)
        out = {}
        for lang in sorted(self._ngram_tables):
            table = self._ngram_tables[lang]
            stable = self._script_tables[lang]
            s = 0.0
            for g, c in grams.items():
                s += c * table.logp.get(g, table.unseen)
            for sc, c in scripts.items():
                s += c * stable.logp.get(sc, stable.unseen)
            out[lang] = s
        return out

    def predict(self, text: str) -> Prediction:
        letters = sum(letter_scripts(text).values())
        if letters < self.min_letters:
            return Prediction(UNKNOWN, float("-inf"))
        ranked = sorted(self.scores(text).items(), key=lambda kv: (-kv[1], kv[0]))
        best, score = ranked[0]
        if self.min_margin > 0 and len(ranked) > 1 and score - ranked[1][1] < self.min_margin:
            return Prediction(UNKNOWN, score)
        return Prediction(best, score)

    def to_json(self) -> dict:
        return {
            "format": FORMAT,
            "version": VERSION,
            "n": self.n,
            "smoothing": self.smoothing,
            "min_letters": self.min_letters,
            "min_margin": self.min_margin,
            "languages": {
                lang: {
                    "ngrams": dict(sorted(self.ngram_counts[lang].items())),
                    "scripts": dict(sorted(self.script_counts[lang].items())),
                }
                for lang in sorted(self.ngram_counts)
            },
        }

    @classmethod
    def from_json(cls, obj: dict) -> LidModel:
        if obj.get("format") != FORMAT:
            raise ValueError("not a LID model file")
        if obj.get("version") != VERSION:
            raise ValueError(f"unsupported LID model version {obj.get('version')!r}")
        langs = obj["languages"]
        return cls(
            n=obj["n"],
            smoothing=obj["smoothing"],
            min_letters=obj["min_letters"],
            min_margin=obj.get("min_margin", 0.0),
            ngram_counts={k: Counter(v["ngrams"]) for k, v in langs.items()},
            script_counts={k: Counter(v["scripts"]) for k, v in langs.items()},
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), ensure_ascii=False, sort_keys=True), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> LidModel:
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def train_lid(
    samples: Iterable[tuple[str, str]],
    n: int = 3,
    smoothing: float = 0.5,
    min_letters: int = 20,
    languages_declared: Iterable[str] | None = None,
    min_margin: float = 0.0,
) -> LidModel:
    """Train from ``(lang, text)`` pairs.

    ``languages_declared`` lists languages that must end up in the model;
    any of them without training characters is an error.
    """
    if n not in (2, 3, 4):
        raise ValueError("n-gram order must be 2, 3 or 4")
    if smoothing <= 0:
        raise ValueError("smoothing must be positive")
    ngram_counts: dict[str, Counter] = {}
    script_counts: dict[str, Counter] = {}
    for lang, text in samples:
        languages.get(lang)
        ngram_counts.setdefault(lang, Counter()).update(char_ngrams(text, n))
        script_counts.setdefault(lang, Counter()).update(letter_scripts(text))
    declared = set(languages_declared or ()) | set(ngram_counts)
    empty = sorted(lang for lang in declared if not script_counts.get(lang))
    if empty:
        raise LidTrainingError(f"no training characters for: {', '.join(empty)}")
    return LidModel(n, smoothing, min_letters, ngram_counts, script_counts, min_margin)


LID_SKIPPED = "lid-skipped"
LID_FILTERED = "lid"


def filter_paragraphs(model: LidModel, doc: CleanDocument, target: str | None = None) -> CleanDocument:
    """Drop paragraphs identified as a language other than ``target``.

    Paragraphs the model cannot decide on are kept. Languages the model does
    not support pass through untouched, tagged ``lid-skipped``.
    """
    target = target or doc.lang
    if target not in model.supported:
        return CleanDocument(doc.id, doc.lang, list(doc.paragraphs), doc.provenance + [LID_SKIPPED])
    kept = []
    for p in doc.paragraphs:
        pred = model.predict(p)
        if pred.is_unknown or pred.lang == target:
            kept.append(p)
    return CleanDocument(doc.id, doc.lang, kept, doc.provenance + [LID_FILTERED])


@dataclass
class LidReport:
    accuracy: dict[str, float | None]
    confusion: dict[str, Counter]

    def to_json(self) -> dict:
        return {
            "accuracy": {k: (None if v is None else round(100 * v, 1)) for k, v in sorted(self.accuracy.items())},
            "confusion": {k: dict(sorted(v.items())) for k, v in sorted(self.confusion.items())},
        }


def evaluate_lid(model: LidModel, test: Iterable[tuple[str, str]], languages_reported: Iterable[str] | None = None) -> LidReport:
    confusion: dict[str, Counter] = {}
    for lang, text in test:
        if lang not in model.supported:
            raise ValueError(f"test label {lang!r} is not supported by the model")
        confusion.setdefault(lang, Counter())[model.predict(text).lang] += 1
    reported = set(languages_reported or ()) | set(confusion)
    accuracy: dict[str, float | None] = {}
    for lang in sorted(reported):
        row = confusion.get(lang)
        accuracy[lang] = row[lang] / sum(row.values()) if row else None
    return LidReport(accuracy, confusion)
