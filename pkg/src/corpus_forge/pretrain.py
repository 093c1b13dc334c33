"""MLM and TLM example construction from tokenized text."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .vocab import CLS, MASK, SEP, VocabModel

IGNORE = -100


@dataclass
class PretrainExample:
    input_ids: list[int]
    labels: list[int]
    segment_boundary: int | None = None

    @property
    def length(self) -> int:
        return len(self.input_ids)

    @property
    def masked_positions(self) -> list[int]:
        return [i for i, lab in enumerate(self.labels) if lab != IGNORE]

    def unmasked(self) -> list[int]:
        return [lab if lab != IGNORE else tok for tok, lab in zip(self.input_ids, self.labels)]

    def to_json(self) -> dict:
        return {
            "input_ids": self.input_ids,
            "labels": self.labels,
            "length": self.length,
            "segment_boundary": self.segment_boundary,
        }


@dataclass(frozen=True)
class ParallelPair:
    id: str
    source: str
    target: str

    def __post_init__(self) -> None:
        if not self.source.strip() or not self.target.strip():
            raise ValueError(f"pair {self.id!r} has an empty side")


def pack_sequences(
    docs: Iterable[Sequence[int]],
    max_len: int = 512,
    cls_id: int | None = None,
    pack: bool = True,
) -> Iterator[list[int]]:
    """Greedily pack whole tokenized documents into sequences of at most ``max_len``.

    A document that does not fit in the open sequence starts a new one; a
    document longer than the budget is cut into budget-sized chunks. When
    ``cls_id`` is given it opens every sequence and takes one position.
    """
    budget = max_len - (1 if cls_id is not None else 0)
    if budget <= 0:
        raise ValueError("max_len too small")
    prefix = [cls_id] if cls_id is not None else []
    current: list[int] = []
    for doc in docs:
        doc = list(doc)
        if not doc:
            continue
        if current and (not pack or len(current) + len(doc) > budget):
            yield prefix + current
            current = []
        while len(doc) > budget:
            yield prefix + doc[:budget]
            doc = doc[budget:]
        current.extend(doc)
        if len(current) == budget:
            yield prefix + current
            current = []
    if current:
        yield prefix + current


def _mask(ids: list[int], vocab: VocabModel, mask_prob: float, rng: np.random.Generator) -> PretrainExample:
    if not 0.0 <= mask_prob < 1.0:
        raise ValueError("mask_prob must be in [0, 1)")
    mask_id = vocab.id_of(MASK)
    n_vocab = len(vocab)
    n_specials = vocab.n_specials
    inputs = list(ids)
    labels = [IGNORE] * len(ids)
    select = rng.random(len(ids))
    action = rng.random(len(ids))
    replacement = rng.integers(n_specials, n_vocab, size=len(ids)) if n_vocab > n_specials else None
    for i, tok in enumerate(ids):
        if vocab.is_special_id(tok) or select[i] >= mask_prob:
            continue
        labels[i] = tok
        if action[i] < 0.8:
            inputs[i] = mask_id
        elif action[i] < 0.9 and replacement is not None:
            inputs[i] = int(replacement[i])
    return PretrainExample(inputs, labels)


def build_mlm(sequence: Sequence[int], vocab: VocabModel, mask_prob: float = 0.15, seed: int | Sequence[int] = 0) -> PretrainExample:
    """Mask non-special positions with probability ``mask_prob`` (80% [MASK], 10% random, 10% kept)."""
    if not sequence:
        raise ValueError("empty sequence")
    return _mask(list(sequence), vocab, mask_prob, np.random.default_rng(seed))


def _truncate_pair(ls: int, lt: int, budget: int) -> tuple[int, int]:
    if ls + lt <= budget:
        return ls, lt
    keep_s = round(budget * ls / (ls + lt))
    keep_s = min(max(keep_s, 1), ls, budget - 1)
    keep_t = min(budget - keep_s, lt)
    keep_s = budget - keep_t
    return keep_s, keep_t


def build_tlm(
    pair: ParallelPair,
    vocab: VocabModel,
    max_len: int = 512,
    mask_prob: float = 0.15,
    seed: int | Sequence[int] = 0,
    add_cls: bool = False,
) -> PretrainExample:
    """``[CLS]? source [SEP] target``, both sides cut proportionally to fit ``max_len``.

    ``segment_boundary`` is the index of the separator, i.e. the length of the
    source segment.
    """
    src = vocab.encode(pair.source)
    tgt = vocab.encode(pair.target)
    if not src or not tgt:
        raise ValueError(f"pair {pair.id!r} tokenizes to an empty side")
    prefix = [vocab.id_of(CLS)] if add_cls else []
    budget = max_len - 1 - len(prefix)
    if budget < 2:
        raise ValueError("max_len too small for a pair")
    ks, kt = _truncate_pair(len(src), len(tgt), budget)
    source = prefix + src[:ks]
    ids = source + [vocab.id_of(SEP)] + tgt[:kt]
    example = _mask(ids, vocab, mask_prob, np.random.default_rng(seed))
    example.segment_boundary = len(source)
    return example


def write_examples(examples: Iterable[PretrainExample], path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for ex in examples:
            fh.write(json.dumps(ex.to_json(), separators=(",", ":")) + "\n")
            n += 1
    return n
