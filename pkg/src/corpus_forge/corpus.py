"""Document model, corpus I/O, sentence segmentation and corpus statistics."""

from __future__ import annotations

import json
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from . import languages

logger = logging.getLogger(__name__)

SENTENCE_DELIMITERS = frozenset("।॥.!?")
OTHER_BUCKET = "other"

_PARAGRAPH_SPLIT = re.compile(r"\n\s*\n")


class CorpusError(Exception):
    """Fatal corpus I/O failure."""


@dataclass(frozen=True)
class RecordError:
    line: int
    message: str


@dataclass
class RawDocument:
    id: str
    text: str
    source_url: str = ""
    lang_hint: str | None = None
    paragraphs: list[str] | None = None


@dataclass
class CleanDocument:
    id: str
    lang: str
    paragraphs: list[str]
    provenance: list[str] = field(default_factory=list)

    @property
    def text(self) -> str:
        return "\n\n".join(self.paragraphs)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "lang": self.lang,
            "paragraphs": self.paragraphs,
            "provenance": self.provenance,
        }

    @classmethod
    def from_json(cls, obj: dict) -> CleanDocument:
        if "paragraphs" in obj:
            paragraphs = list(obj["paragraphs"])
        else:
            paragraphs = split_paragraphs(obj["text"])
        return cls(
            id=str(obj["id"]),
            lang=obj["lang"],
            paragraphs=[p.strip() for p in paragraphs if p.strip()],
            provenance=list(obj.get("provenance", [])),
        )


def split_paragraphs(text: str) -> list[str]:
    return [p.strip() for p in _PARAGRAPH_SPLIT.split(text) if p.strip()]


def to_clean(raw: RawDocument, lang: str | None = None) -> CleanDocument:
    paragraphs = raw.paragraphs if raw.paragraphs is not None else split_paragraphs(raw.text)
    return CleanDocument(
        id=raw.id,
        lang=lang or raw.lang_hint or "",
        paragraphs=[p.strip() for p in paragraphs if p.strip()],
    )


def _parse_jsonl_record(obj: object) -> RawDocument:
    if not isinstance(obj, dict):
        raise ValueError("record is not a JSON object")
    if "id" not in obj or not str(obj["id"]):
        raise ValueError("missing or empty 'id'")
    paragraphs = obj.get("paragraphs")
    text = obj.get("text")
    if paragraphs is not None:
        if not isinstance(paragraphs, list) or not all(isinstance(p, str) for p in paragraphs):
            raise ValueError("'paragraphs' must be a list of strings")
        if text is None:
            text = "\n\n".join(paragraphs)
    if not isinstance(text, str):
        raise ValueError("missing 'text'")
    lang = obj.get("lang")
    if lang is not None and not isinstance(lang, str):
        raise ValueError("'lang' must be a string")
    return RawDocument(
        id=str(obj["id"]),
        text=text,
        source_url=obj.get("url") or "",
        lang_hint=lang,
        paragraphs=paragraphs,
    )


def read_corpus(
    path: str | Path,
    fmt: str = "jsonl",
    errors: list[RecordError] | None = None,
) -> Iterator[RawDocument]:
    """Stream documents from ``path`` in file order.

    Malformed records are skipped and appended to ``errors`` (when given) with
    their 1-based line number. An unreadable file raises :class:`CorpusError`
    immediately.
    """
    path = Path(path)
    if fmt not in ("jsonl", "text"):
        raise ValueError(f"unknown corpus format {fmt!r}")
    try:
        fh = path.open("rb")
    except OSError as exc:
        raise CorpusError(f"cannot read {path}: {exc}") from exc
    return _iter_records(fh, path, fmt, errors)


def _iter_records(fh, path: Path, fmt: str, errors: list[RecordError] | None):
    seen: set[str] = set()
    with fh:
        for lineno, raw in enumerate(fh, 1):
            try:
                line = raw.decode("utf-8").rstrip("\r\n")
            except UnicodeDecodeError as exc:
                _record_error(errors, path, lineno, f"invalid UTF-8: {exc}")
                continue
            if not line.strip():
                continue
            if fmt == "text":
                yield RawDocument(id=f"{path.name}:{lineno}", text=line)
                continue
            try:
                doc = _parse_jsonl_record(json.loads(line))
            except ValueError as exc:
                _record_error(errors, path, lineno, str(exc))
                continue
            if doc.id in seen:
                _record_error(errors, path, lineno, f"duplicate id {doc.id!r}")
                continue
            seen.add(doc.id)
            yield doc


def _record_error(errors, path, lineno, message):
    logger.warning("%s:%d: %s", path, lineno, message)
    if errors is not None:
        errors.append(RecordError(lineno, message))


def read_clean_corpus(path: str | Path, errors: list[RecordError] | None = None) -> Iterator[CleanDocument]:
    """Read documents that already carry a resolved ``lang``."""
    for raw in read_corpus(path, "jsonl", errors):
        if raw.lang_hint is None:
            if errors is not None:
                errors.append(RecordError(0, f"document {raw.id!r} has no lang"))
            continue
        yield to_clean(raw)


def write_clean_corpus(docs: Iterable[CleanDocument], path: str | Path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for doc in docs:
            fh.write(json.dumps(doc.to_json(), ensure_ascii=False) + "\n")
            n += 1
    return n


def segment_sentences(text: str, lang: str | None = None) -> list[tuple[int, int]]:
    """Split ``text`` into (start, end) sentence spans.

    Boundaries fall after runs of danda, double danda, '.', '!' or '?' and at
    newlines. Spans are trimmed of surrounding whitespace and never empty.
    ``lang`` is accepted for interface symmetry; the rule is language independent.
    """
    spans: list[tuple[int, int]] = []
    n = len(text)
    i = 0
    while i < n:
        while i < n and text[i].isspace():
            i += 1
        if i >= n:
            break
        start = i
        while i < n and text[i] != "\n" and text[i] not in SENTENCE_DELIMITERS:
            i += 1
        while i < n and text[i] in SENTENCE_DELIMITERS:
            i += 1
        end = i
        while end > start and text[end - 1].isspace():
            end -= 1
        spans.append((start, end))
    return spans


def split_sentences(text: str, lang: str | None = None) -> list[str]:
    return [text[s:e] for s, e in segment_sentences(text, lang)]


def count_tokens(text: str) -> int:
    return len(text.split())


@dataclass
class LanguageStats:
    tokens: int = 0
    sentences: int = 0
    documents: int = 0

    def merge(self, other: LanguageStats) -> LanguageStats:
        return LanguageStats(
            self.tokens + other.tokens,
            self.sentences + other.sentences,
            self.documents + other.documents,
        )


@dataclass
class CorpusStats:
    per_language: dict[str, LanguageStats] = field(default_factory=dict)
    unknown_codes: set[str] = field(default_factory=set)

    @property
    def tokens(self) -> int:
        return sum(s.tokens for s in self.per_language.values())

    @property
    def sentences(self) -> int:
        return sum(s.sentences for s in self.per_language.values())

    @property
    def documents(self) -> int:
        return sum(s.documents for s in self.per_language.values())

    def add(self, doc: CleanDocument) -> None:
        lang = doc.lang
        if not languages.is_known(lang):
            self.unknown_codes.add(lang)
            lang = OTHER_BUCKET
        entry = self.per_language.setdefault(lang, LanguageStats())
        entry.documents += 1
        for p in doc.paragraphs:
            entry.tokens += count_tokens(p)
            entry.sentences += len(segment_sentences(p))

    def merge(self, other: CorpusStats) -> CorpusStats:
        merged = dict(self.per_language)
        for lang, s in other.per_language.items():
            merged[lang] = merged[lang].merge(s) if lang in merged else s
        return CorpusStats(merged, self.unknown_codes | other.unknown_codes)

    def to_json(self) -> dict:
        return {
            "languages": {
                lang: {"tokens": s.tokens, "sentences": s.sentences, "documents": s.documents}
                for lang, s in sorted(self.per_language.items())
            },
            "total": {"tokens": self.tokens, "sentences": self.sentences, "documents": self.documents},
            "unknown_codes": sorted(self.unknown_codes),
        }


def compute_stats(corpus: Iterable[CleanDocument]) -> CorpusStats:
    stats = CorpusStats()
    for doc in corpus:
        stats.add(doc)
    if stats.unknown_codes:
        logger.warning("unknown language codes counted as %r: %s", OTHER_BUCKET, sorted(stats.unknown_codes))
    return stats


@dataclass
class QueryList:
    words: list[str]
    short: bool = False


def generate_search_queries(corpus: Iterable[CleanDocument | str], lang: str, k: int) -> QueryList:
    """The ``k`` most frequent whitespace tokens of ``lang``; ties break lexicographically.

    Plain strings in ``corpus`` are taken to be text in ``lang``.
    """
    if k <= 0:
        raise ValueError("k must be positive")
    freq: Counter = Counter()
    for doc in corpus:
        if isinstance(doc, str):
            texts = [doc]
        elif doc.lang == lang:
            texts = doc.paragraphs
        else:
            continue
        for t in texts:
            freq.update(t.casefold().split())
    if not freq:
        raise ValueError(f"no text for language {lang!r}")
    ranked = sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))
    words = [w for w, _ in ranked[:k]]
    return QueryList(words, short=len(words) < k)
