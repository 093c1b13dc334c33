"""WordPiece vocabulary training, greedy longest-match tokenization and fertility."""

from __future__ import annotations

import heapq
import logging
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from . import languages

logger = logging.getLogger(__name__)

CONTINUATION = "##"
PAD, UNK, CLS, SEP, MASK = "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"
BASE_SPECIALS = (PAD, UNK, CLS, SEP, MASK)
LANG_TOKENS = tuple(languages.lang_token(code) for code in languages.CODES)
SPECIALS = BASE_SPECIALS + LANG_TOKENS
MAX_PIECES_PER_WORD = 100


def words_of(text: str) -> list[str]:
    return unicodedata.normalize("NFC", text).split()


@dataclass
class VocabModel:
    pieces: list[str]
    n_specials: int = len(SPECIALS)
    n_base: int = 0
    max_pieces_per_word: int = MAX_PIECES_PER_WORD
    _ids: dict[str, int] = field(init=False, repr=False, compare=False)
    _max_len: int = field(init=False, repr=False, compare=False)
    _cache: dict[str, tuple[str, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(set(self.pieces)) != len(self.pieces):
            raise ValueError("duplicate pieces in vocabulary")
        self._ids = {p: i for i, p in enumerate(self.pieces)}
        matchable = self.pieces[self.n_specials :]
        self._max_len = max((len(p) for p in matchable), default=0)
        self._cache = {}

    @property
    def specials(self) -> list[str]:
        return self.pieces[: self.n_specials]

    def __len__(self) -> int:
        return len(self.pieces)

    def __contains__(self, piece: str) -> bool:
        return piece in self._ids

    def id_of(self, piece: str) -> int:
        return self._ids[piece]

    def is_special_id(self, i: int) -> bool:
        return i < self.n_specials

    def _is_piece(self, s: str) -> bool:
        i = self._ids.get(s)
        return i is not None and i >= self.n_specials

    def tokenize_word(self, word: str) -> tuple[str, ...]:
        cached = self._cache.get(word)
        if cached is not None:
            return cached
        out: list[str] = []
        start, n = 0, len(word)
        while start < n:
            end = min(n, start + self._max_len)
            found = None
            while end > start:
                cand = word[start:end] if start == 0 else CONTINUATION + word[start:end]
                if self._is_piece(cand):
                    found = cand
                    break
                end -= 1
            if found is None or len(out) >= self.max_pieces_per_word:
                out = [UNK]
                break
            out.append(found)
            start = end
        result = tuple(out)
        if len(self._cache) < 1 << 20:
            self._cache[word] = result
        return result

    def tokenize(self, text: str) -> list[str]:
        out: list[str] = []
        for w in words_of(text):
            out.extend(self.tokenize_word(w))
        return out

    def encode(self, text: str, lang_prefix: bool = True) -> list[int]:
        """Piece ids for ``text``; a leading ``<xx>`` word maps to its lang token when ``lang_prefix``."""
        words = words_of(text)
        ids: list[int] = []
        if lang_prefix and words and words[0] in LANG_TOKENS and words[0] in self._ids:
            ids.append(self._ids[words[0]])
            words = words[1:]
        for w in words:
            ids.extend(self._ids[p] for p in self.tokenize_word(w))
        return ids

    def truncated(self, size: int) -> VocabModel:
        """The vocabulary a training run with budget ``size`` would have produced."""
        if size < self.n_specials + self.n_base:
            raise ValueError("size smaller than specials plus base alphabet")
        return VocabModel(self.pieces[:size], self.n_specials, self.n_base, self.max_pieces_per_word)

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for p in self.pieces:
                fh.write(p + "\n")

    @classmethod
    def load(cls, path: str | Path) -> VocabModel:
        pieces = Path(path).read_text(encoding="utf-8").split("\n")
        if pieces and pieces[-1] == "":
            pieces.pop()
        n_specials = 0
        while n_specials < len(pieces) and pieces[n_specials] in SPECIALS:
            n_specials += 1
        return cls(pieces, n_specials=n_specials)


def detokenize_word(pieces: Sequence[str]) -> str:
    return "".join(p[len(CONTINUATION):] if p.startswith(CONTINUATION) else p for p in pieces)


def sample_training_text(docs: Iterable, fraction: float, seed: int) -> Iterator:
    """Keep each item independently with probability ``fraction``."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must be in (0, 1]")
    rng = np.random.default_rng(seed)
    for doc in docs:
        if rng.random() < fraction:
            yield doc


class _Trainer:
    def __init__(self, word_freq: Mapping[str, int], min_pair_freq: int) -> None:
        self.min_pair_freq = min_pair_freq
        chars = sorted({ch for w in word_freq for ch in w})
        self.pieces: list[str] = list(SPECIALS)
        for ch in chars:
            self.pieces.append(ch)
        for ch in chars:
            self.pieces.append(CONTINUATION + ch)
        self.n_base = 2 * len(chars)
        self.ids = {p: i for i, p in enumerate(self.pieces)}
        self.words: list[list[int]] = []
        self.freqs: list[int] = []
        for w in sorted(word_freq):
            seg = [self.ids[w[0]]] + [self.ids[CONTINUATION + c] for c in w[1:]]
            self.words.append(seg)
            self.freqs.append(word_freq[w])
        self.piece_count: Counter = Counter()
        self.pair_count: Counter = Counter()
        self.pair_where: dict[tuple[int, int], set[int]] = {}
        self.pairs_by_piece: dict[int, set[tuple[int, int]]] = {}
        for wi, seg in enumerate(self.words):
            self._add_word(wi, seg, +1)
        self.heap: list = []
        for pair in self.pair_count:
            self._push(pair)

    def _add_word(self, wi: int, seg: list[int], sign: int) -> set[tuple[int, int]]:
        f = self.freqs[wi] * sign
        touched = set()
        for p in seg:
            self.piece_count[p] += f
        for pair in zip(seg, seg[1:]):
            self.pair_count[pair] += f
            touched.add(pair)
            if sign > 0:
                self.pair_where.setdefault(pair, set()).add(wi)
                self.pairs_by_piece.setdefault(pair[0], set()).add(pair)
                self.pairs_by_piece.setdefault(pair[1], set()).add(pair)
        if sign < 0:
            for pair in touched:
                self.pair_where[pair].discard(wi)
        return touched

    def _score(self, pair: tuple[int, int]) -> float:
        return self.pair_count[pair] / (self.piece_count[pair[0]] * self.piece_count[pair[1]])

    def _push(self, pair: tuple[int, int]) -> None:
        freq = self.pair_count[pair]
        if freq >= self.min_pair_freq and freq > 0:
            a, b = pair
            heapq.heappush(self.heap, (-self._score(pair), -freq, self.pieces[a], self.pieces[b], pair))

    def _pop_best(self) -> tuple[int, int] | None:
        while self.heap:
            neg_score, neg_freq, _, _, pair = heapq.heappop(self.heap)
            freq = self.pair_count.get(pair, 0)
            if freq < self.min_pair_freq or freq <= 0:
                continue
            if freq == -neg_freq and self._score(pair) == -neg_score:
                return pair
        return None

    def _merged_piece(self, pair: tuple[int, int]) -> int:
        a, b = self.pieces[pair[0]], self.pieces[pair[1]]
        merged = a + b[len(CONTINUATION):]
        pid = self.ids.get(merged)
        if pid is None:
            pid = len(self.pieces)
            self.pieces.append(merged)
            self.ids[merged] = pid
        return pid

    def merge(self, pair: tuple[int, int]) -> None:
        new = self._merged_piece(pair)
        a, b = pair
        changed: set[tuple[int, int]] = set()
        for wi in sorted(self.pair_where.get(pair, ())):
            seg = self.words[wi]
            changed |= self._add_word(wi, seg, -1)
            out: list[int] = []
            i = 0
            while i < len(seg):
                if i + 1 < len(seg) and seg[i] == a and seg[i + 1] == b:
                    out.append(new)
                    i += 2
                else:
                    out.append(seg[i])
                    i += 1
            self.words[wi] = out
            changed |= self._add_word(wi, out, +1)
        for piece in (a, b, new):
            changed |= self.pairs_by_piece.get(piece, set())
        for p in list(changed):
            if self.pair_count.get(p, 0) <= 0:
                self.pair_count.pop(p, None)
                self.pair_where.pop(p, None)
                for x in p:
                    s = self.pairs_by_piece.get(x)
                    if s is not None:
                        s.discard(p)
            else:
                self._push(p)
        if len(self.heap) > 4 * max(len(self.pair_count), 1024):
            self.heap = []
            for p in self.pair_count:
                self._push(p)


def train_wordpiece(texts: Iterable[str], vocab_size: int = 8000, min_pair_freq: int = 2) -> VocabModel:
    """Learn a WordPiece vocabulary by likelihood-scored pair merging.

    The score of an adjacent pair (a, b) is count(ab) / (count(a) * count(b)).
    Ties go to the more frequent pair, then to the lexicographically smaller
    (a, b). Training stops at ``vocab_size`` pieces or when no pair occurs at
    least ``min_pair_freq`` times.
    """
    word_freq: Counter = Counter()
    for t in texts:
        word_freq.update(words_of(t))
    if not word_freq:
        raise ValueError("no training text")
    trainer = _Trainer(word_freq, max(min_pair_freq, 1))
    base = len(trainer.pieces)
    if vocab_size < base:
        raise ValueError(f"vocab_size {vocab_size} is smaller than specials plus alphabet ({base})")
    merges = 0
    while len(trainer.pieces) < vocab_size:
        pair = trainer._pop_best()
        if pair is None:
            break
        trainer.merge(pair)
        merges += 1
    logger.info("wordpiece: %d merges, %d pieces", merges, len(trainer.pieces))
    return VocabModel(trainer.pieces, n_specials=len(SPECIALS), n_base=trainer.n_base)


@dataclass
class FertilityReport:
    words: dict[str, int]
    pieces: dict[str, int]
    unknown: dict[str, int]

    @property
    def fertility(self) -> dict[str, float]:
        return {lang: self.pieces[lang] / self.words[lang] for lang in self.words}

    def to_json(self) -> dict:
        fert = self.fertility
        return {
            lang: {
                "fertility": fert[lang],
                "words": self.words[lang],
                "pieces": self.pieces[lang],
                "unknown_words": self.unknown[lang],
            }
            for lang in sorted(self.words)
        }


def fertility(model: VocabModel, texts_by_lang: Mapping[str, Iterable[str]]) -> FertilityReport:
    """Pieces per whitespace word for each language; [UNK] counts as one piece."""
    words: dict[str, int] = {}
    pieces: dict[str, int] = {}
    unknown: dict[str, int] = {}
    for lang, texts in texts_by_lang.items():
        nw = npc = nu = 0
        for text in texts:
            for w in words_of(text):
                seg = model.tokenize_word(w)
                nw += 1
                npc += len(seg)
                nu += seg == (UNK,)
        if nw == 0:
            logger.warning("no words for language %s; omitted from fertility report", lang)
            continue
        words[lang], pieces[lang], unknown[lang] = nw, npc, nu
    return FertilityReport(words, pieces, unknown)
