"""Sentence and document cleaning rules with per-rule accounting."""

from __future__ import annotations

import hashlib
import logging
import unicodedata
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

from . import languages
from .automaton import TokenAutomaton
from .corpus import CleanDocument, count_tokens, segment_sentences
from .lid import LidModel, filter_paragraphs
from .scripts import native_ratio

logger = logging.getLogger(__name__)

DEFAULT_STAGES = ("lid", "script", "offensive", "punctuation", "dedup")
STAGES = frozenset(DEFAULT_STAGES)


class ConfigError(ValueError):
    """Pipeline configuration that cannot run."""


def is_punct(ch: str) -> bool:
    return unicodedata.category(ch)[0] == "P"


def strip_punct(text: str) -> str:
    return "".join(ch for ch in text if not is_punct(ch))


def _match_token(tok: str, casefold: bool) -> str:
    start, end = 0, len(tok)
    while start < end and is_punct(tok[start]):
        start += 1
    while end > start and is_punct(tok[end - 1]):
        end -= 1
    tok = unicodedata.normalize("NFC", tok[start:end])
    return tok.casefold() if casefold else tok


def match_tokens(text: str, casefold: bool = True) -> list[str]:
    """Whitespace tokens with surrounding punctuation removed, as used for blacklist matching."""
    out = []
    for tok in text.split():
        t = _match_token(tok, casefold)
        if t:
            out.append(t)
    return out


@dataclass
class Blacklist:
    lang: str
    words: frozenset[str]
    phrases: tuple[tuple[str, ...], ...]
    casefold: bool = True
    _automaton: TokenAutomaton = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        for w in self.words:
            if not w or any(ch.isspace() for ch in w):
                raise ValueError(f"invalid blacklist word {w!r}")
        for p in self.phrases:
            if len(p) < 2:
                raise ValueError(f"blacklist phrase needs at least two tokens: {p!r}")
        self._automaton = TokenAutomaton([(w,) for w in sorted(self.words)] + list(self.phrases))

    @classmethod
    def from_entries(cls, lang: str, entries: Iterable[str], casefold: bool = True) -> Blacklist:
        words: set[str] = set()
        phrases: list[tuple[str, ...]] = []
        for entry in entries:
            toks = match_tokens(entry, casefold)
            if len(toks) == 1:
                words.add(toks[0])
            elif len(toks) > 1 and tuple(toks) not in phrases:
                phrases.append(tuple(toks))
        return cls(lang, frozenset(words), tuple(phrases), casefold)

    @classmethod
    def load(cls, lang: str, path: str | Path, casefold: bool = True) -> Blacklist:
        entries = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line and not line.startswith("#"):
                    entries.append(line)
        return cls.from_entries(lang, entries, casefold)

    def matches(self, sentence: str) -> bool:
        return self._automaton.search(match_tokens(sentence, self.casefold))


def _rejoin(text: str, spans: Sequence[tuple[int, int]], keep: Sequence[bool]) -> str:
    """Concatenate kept spans; a span that ended at a newline keeps that boundary."""
    out = ""
    sep = ""
    for i, ((s, e), k) in enumerate(zip(spans, keep)):
        if not k:
            continue
        out = out + sep + text[s:e] if out else text[s:e]
        gap = text[e : spans[i + 1][0]] if i + 1 < len(spans) else ""
        sep = "\n" if "\n" in gap else (" " if gap else "")
    return out


def _filter_sentences(doc: CleanDocument, drop) -> tuple[CleanDocument, int, int]:
    """Apply ``drop(sentence)`` to every sentence; returns (doc, sentences_removed, tokens_removed)."""
    removed = 0
    paragraphs = []
    for p in doc.paragraphs:
        spans = segment_sentences(p, doc.lang)
        keep = [not drop(p[s:e]) for s, e in spans]
        if all(keep):
            paragraphs.append(p)
            continue
        removed += keep.count(False)
        joined = _rejoin(p, spans, keep).strip()
        if joined:
            paragraphs.append(joined)
    if not removed:
        return doc, 0, 0
    tokens_removed = sum(count_tokens(p) for p in doc.paragraphs) - sum(count_tokens(p) for p in paragraphs)
    return CleanDocument(doc.id, doc.lang, paragraphs, list(doc.provenance)), removed, tokens_removed


def script_ratio_filter(doc: CleanDocument, threshold: float = 0.75) -> CleanDocument:
    return _script_ratio_filter(doc, threshold)[0]


def _script_ratio_filter(doc: CleanDocument, threshold: float = 0.75):
    script = languages.script_of(doc.lang)
    return _filter_sentences(doc, lambda s: native_ratio(s, script) < threshold)


def punctuation_length_filter(doc: CleanDocument, min_words: int = 10) -> bool:
    """True to keep: the punctuation-stripped document has at least ``min_words`` tokens."""
    return sum(count_tokens(strip_punct(p)) for p in doc.paragraphs) >= min_words


def offensive_filter(doc: CleanDocument, blacklist: Blacklist) -> CleanDocument:
    return _offensive_filter(doc, blacklist)[0]


def _offensive_filter(doc: CleanDocument, blacklist: Blacklist):
    if blacklist.lang != doc.lang:
        raise ValueError(f"blacklist for {blacklist.lang!r} applied to a {doc.lang!r} document")
    return _filter_sentences(doc, blacklist.matches)


def dedup_key(doc: CleanDocument) -> bytes:
    text = unicodedata.normalize("NFC", " ".join(doc.paragraphs))
    key = " ".join(text.casefold().split())
    return hashlib.blake2b(key.encode("utf-8"), digest_size=16).digest()


def dedup(corpus: Iterable[CleanDocument], seen: set[bytes] | None = None) -> Iterator[CleanDocument]:
    """Yield the first document of every normalized-text equivalence class, in stream order."""
    seen = set() if seen is None else seen
    for doc in corpus:
        key = dedup_key(doc)
        if key in seen:
            continue
        seen.add(key)
        yield doc


@dataclass
class FilterReport:
    documents_in: int = 0
    documents_out: int = 0
    paragraphs_removed_lid: int = 0
    documents_lid_skipped: int = 0
    sentences_removed_script: int = 0
    sentences_removed_offensive: int = 0
    documents_removed_offensive: int = 0
    documents_offensive_skipped: int = 0
    documents_removed_punctuation: int = 0
    documents_removed_dedup: int = 0
    documents_removed_emptied: int = 0
    tokens_before: int = 0
    tokens_after: int = 0
    tokens_removed: Counter = field(default_factory=Counter)

    def merge(self, other: FilterReport) -> FilterReport:
        out = FilterReport()
        for name in self.__dataclass_fields__:
            if name == "tokens_removed":
                out.tokens_removed = self.tokens_removed + other.tokens_removed
            else:
                setattr(out, name, getattr(self, name) + getattr(other, name))
        return out

    def stage_tokens(self, stages: Sequence[str]) -> dict[str, int]:
        """Token count remaining after each stage."""
        remaining = self.tokens_before
        out = {}
        for stage in stages:
            remaining -= self.tokens_removed.get(stage, 0)
            out[stage] = remaining
        return out

    def to_json(self, stages: Sequence[str] = DEFAULT_STAGES) -> dict:
        d = {name: getattr(self, name) for name in self.__dataclass_fields__ if name != "tokens_removed"}
        d["tokens_removed"] = {s: self.tokens_removed.get(s, 0) for s in stages}
        d["tokens_after_stage"] = self.stage_tokens(stages)
        return d


@dataclass
class CleanConfig:
    stages: tuple[str, ...] = DEFAULT_STAGES
    threshold: float = 0.75
    min_words: int = 10
    lid_model: LidModel | None = None
    blacklists: Mapping[str, Blacklist] = field(default_factory=dict)
    offensive_drop_document: bool = False

    def validate(self) -> None:
        unknown = [s for s in self.stages if s not in STAGES]
        if unknown:
            raise ConfigError(f"unknown stages: {unknown}")
        if len(set(self.stages)) != len(self.stages):
            raise ConfigError("stage listed twice")
        if "lid" in self.stages and self.lid_model is None:
            raise ConfigError("stage 'lid' needs a LID model")
        if "offensive" in self.stages and not self.blacklists:
            raise ConfigError("stage 'offensive' needs at least one blacklist")
        if not 0.0 <= self.threshold <= 1.0:
            raise ConfigError("threshold must be in [0, 1]")
        if self.min_words < 0:
            raise ConfigError("min_words must be non-negative")
        for lang, bl in self.blacklists.items():
            if bl.lang != lang:
                raise ConfigError(f"blacklist registered for {lang!r} is for {bl.lang!r}")


def _tagged(doc: CleanDocument, tag: str) -> CleanDocument:
    return CleanDocument(doc.id, doc.lang, list(doc.paragraphs), doc.provenance + [tag])


def _tokens(doc: CleanDocument) -> int:
    return sum(count_tokens(p) for p in doc.paragraphs)


def clean_document(doc: CleanDocument, config: CleanConfig) -> tuple[CleanDocument | None, FilterReport]:
    """Run every per-document stage of ``config`` (all except dedup) on one document."""
    report = FilterReport(documents_in=1)
    report.tokens_before = _tokens(doc)
    current: CleanDocument | None = doc
    for stage in config.stages:
        if current is None or stage == "dedup":
            continue
        before = _tokens(current)
        if stage == "lid":
            out = filter_paragraphs(config.lid_model, current, current.lang)
            if out.provenance[-1] == "lid-skipped":
                report.documents_lid_skipped += 1
            report.paragraphs_removed_lid += len(current.paragraphs) - len(out.paragraphs)
            current = out
        elif stage == "script":
            out, n, _ = _script_ratio_filter(current, config.threshold)
            report.sentences_removed_script += n
            current = _tagged(out, "script")
        elif stage == "offensive":
            bl = config.blacklists.get(current.lang)
            if bl is None:
                report.documents_offensive_skipped += 1
                current = _tagged(current, "offensive-skipped")
            else:
                out, n, _ = _offensive_filter(current, bl)
                if n and config.offensive_drop_document:
                    report.documents_removed_offensive += 1
                    report.tokens_removed[stage] += before
                    current = None
                    continue
                report.sentences_removed_offensive += n
                current = _tagged(out, "offensive")
        elif stage == "punctuation":
            if not punctuation_length_filter(current, config.min_words):
                report.documents_removed_punctuation += 1
                report.tokens_removed[stage] += before
                current = None
                continue
            current = _tagged(current, "punctuation")
        if not current.paragraphs:
            report.documents_removed_emptied += 1
            report.tokens_removed[stage] += before
            current = None
            continue
        report.tokens_removed[stage] += before - _tokens(current)
    if current is not None:
        report.documents_out = 1
        report.tokens_after = _tokens(current)
    return current, report


def _clean_chunk(args):
    docs, config = args
    return [clean_document(d, config) for d in docs]


def _chunked(it: Iterable, size: int):
    chunk = []
    for x in it:
        chunk.append(x)
        if len(chunk) == size:
            yield chunk
            chunk = []
    if chunk:
        yield chunk


def _per_document(corpus, config: CleanConfig, workers: int):
    if workers <= 1:
        for doc in corpus:
            yield clean_document(doc, config)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map preserves input order
        for results in pool.map(_clean_chunk, ((c, config) for c in _chunked(corpus, 256))):
            yield from results


def run_pipeline(
    corpus: Iterable[CleanDocument],
    config: CleanConfig,
    workers: int = 1,
) -> tuple[Iterator[CleanDocument], FilterReport]:
    """Clean ``corpus`` lazily.

    Returns the output stream and a report that is filled in as the stream is
    consumed; it is complete once the stream is exhausted.
    """
    config.validate()
    report = FilterReport()

    def stream():
        nonlocal report
        seen: set[bytes] = set()
        dedup_on = "dedup" in config.stages
        for doc, partial in _per_document(corpus, config, workers):
            report_delta = partial
            if doc is not None and dedup_on:
                key = dedup_key(doc)
                if key in seen:
                    report_delta.documents_removed_dedup += 1
                    report_delta.documents_out = 0
                    report_delta.tokens_removed["dedup"] += report_delta.tokens_after
                    report_delta.tokens_after = 0
                    doc = None
                else:
                    seen.add(key)
            _accumulate(report, report_delta)
            if doc is not None:
                yield doc

    return stream(), report


def _accumulate(into: FilterReport, delta: FilterReport) -> None:
    merged = into.merge(delta)
    for name in into.__dataclass_fields__:
        setattr(into, name, getattr(merged, name))
