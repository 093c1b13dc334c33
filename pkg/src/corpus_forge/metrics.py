"""Scoring for classification, IOB2 chunking, extractive QA and sentence retrieval,
plus the two benchmark aggregation views (per task over languages, per language
over tasks)."""

from __future__ import annotations

import json
import struct
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

TASK_METRICS = {
    "sentiment": "accuracy",
    "xnli": "accuracy",
    "copa": "accuracy",
    "paraphrase": "accuracy",
    "intent": "accuracy",
    "ner": "chunk_f1",
    "slotfill": "chunk_f1",
    "qa": "span_f1",
    "retrieval": "retrieval_accuracy",
}


def accuracy(records: Iterable[tuple[object, object]]) -> float:
    n = correct = 0
    for gold, pred in records:
        n += 1
        correct += gold == pred
    if n == 0:
        raise ValueError("accuracy of an empty record set")
    return correct / n


# -- IOB2 chunks --------------------------------------------------------------


def _split_tag(tag: str) -> tuple[str, str | None]:
    if tag == "O" or not tag:
        return "O", None
    if len(tag) > 2 and tag[1] == "-" and tag[0] in "BI":
        return tag[0], tag[2:]
    raise ValueError(f"not an IOB2 tag: {tag!r}")


def extract_spans(tags: Sequence[str]) -> tuple[set[tuple[str, int, int]], int]:
    """Chunks as ``(type, start, end_exclusive)`` plus the number of repaired tags.

    An ``I-X`` that does not continue an open ``X`` chunk is read as ``B-X``.
    """
    spans = set()
    repaired = 0
    cur_type: str | None = None
    start = 0
    for i, tag in enumerate(tags):
        prefix, typ = _split_tag(tag)
        if prefix == "I" and cur_type == typ:
            continue
        if cur_type is not None:
            spans.add((cur_type, start, i))
            cur_type = None
        if prefix == "O":
            continue
        if prefix == "I":
            repaired += 1
        cur_type, start = typ, i
    if cur_type is not None:
        spans.add((cur_type, start, len(tags)))
    return spans, repaired


@dataclass
class ChunkScore:
    tp: int = 0
    n_pred: int = 0
    n_gold: int = 0
    repaired: int = 0
    errors: list[int] = field(default_factory=list)

    @property
    def precision(self) -> float:
        return self.tp / self.n_pred if self.n_pred else 0.0

    @property
    def recall(self) -> float:
        return self.tp / self.n_gold if self.n_gold else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def to_json(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "tp": self.tp,
            "predicted": self.n_pred,
            "gold": self.n_gold,
            "repaired_tags": self.repaired,
            "record_errors": self.errors,
        }


def chunk_f1(golds: Iterable[Sequence[str]], preds: Iterable[Sequence[str]]) -> ChunkScore:
    """Micro-averaged exact-span chunk P/R/F1 over all records.

    Records whose gold and predicted sequences differ in length are excluded
    and their indices listed in ``errors``.
    """
    score = ChunkScore()
    for idx, (gold, pred) in enumerate(zip(golds, preds, strict=True)):
        if len(gold) != len(pred):
            score.errors.append(idx)
            continue
        g, _ = extract_spans(gold)
        p, rep = extract_spans(pred)
        score.tp += len(g & p)
        score.n_gold += len(g)
        score.n_pred += len(p)
        score.repaired += rep
    return score


# -- extractive QA ------------------------------------------------------------


def normalize_answer(text: str) -> list[str]:
    text = unicodedata.normalize("NFC", text).casefold()
    text = "".join(" " if unicodedata.category(ch)[0] == "P" else ch for ch in text)
    return text.split()


def _token_f1(pred: list[str], gold: list[str]) -> float:
    common = Counter(pred) & Counter(gold)
    overlap = sum(common.values())
    if overlap == 0:
        return 0.0
    p = overlap / len(pred)
    r = overlap / len(gold)
    return 2 * p * r / (p + r)


def span_f1(golds: Sequence[str] | str, pred: str, normalize: bool = True) -> float:
    """Bag-of-tokens F1 against the best matching gold answer.

    With no non-empty gold answer the question is unanswerable: an empty
    prediction scores 1, anything else 0.
    """
    if isinstance(golds, str):
        golds = [golds]
    tok = normalize_answer if normalize else str.split
    gold_toks = [tok(g) for g in golds]
    gold_toks = [g for g in gold_toks if g]
    pred_toks = tok(pred)
    if not gold_toks:
        return float(not pred_toks)
    if not pred_toks:
        return 0.0
    return max(_token_f1(pred_toks, g) for g in gold_toks)


def qa_score(records: Iterable[tuple[Sequence[str] | str, str]], normalize: bool = True) -> float:
    """Mean per-record span F1, times 100."""
    scores = [span_f1(g, p, normalize) for g, p in records]
    if not scores:
        raise ValueError("no QA records")
    return 100.0 * sum(scores) / len(scores)


# -- retrieval ----------------------------------------------------------------


def mean_pool(vectors, mask=None) -> np.ndarray:
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.ndim != 2:
        raise ValueError("expected a (positions, dim) array")
    if mask is None:
        mask = np.ones(len(vectors), dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValueError("every position is masked")
    return vectors[mask].mean(axis=0)


@dataclass
class RetrievalResult:
    accuracy: float
    nearest: np.ndarray
    zero_norm_src: list[int]
    zero_norm_tgt: list[int]


def retrieve(src, tgt) -> RetrievalResult:
    """Nearest target row by cosine similarity for every source row.

    Pairs involving a zero-norm row have similarity -inf. Ties go to the
    lowest target index. A source row whose similarities are all -inf has no
    nearest target (index -1) and counts as a miss.
    """
    src = np.asarray(src, dtype=np.float64)
    tgt = np.asarray(tgt, dtype=np.float64)
    if src.shape != tgt.shape or src.ndim != 2:
        raise ValueError(f"embedding shapes differ or are not 2-D: {src.shape} vs {tgt.shape}")
    sn = np.linalg.norm(src, axis=1)
    tn = np.linalg.norm(tgt, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        sims = (src / sn[:, None]) @ (tgt / tn[:, None]).T
    sims[sn == 0, :] = -np.inf
    sims[:, tn == 0] = -np.inf
    nearest = np.argmax(sims, axis=1) if len(tgt) else np.zeros(len(src), dtype=int)
    nearest[~np.isfinite(sims).any(axis=1)] = -1
    acc = float(np.mean(nearest == np.arange(len(src)))) if len(src) else 0.0
    return RetrievalResult(acc, nearest, np.flatnonzero(sn == 0).tolist(), np.flatnonzero(tn == 0).tolist())


def retrieval_accuracy(src, tgt) -> float:
    return retrieve(src, tgt).accuracy


EMB_MAGIC = b"CFEM"


def write_embeddings(path: str | Path, matrix) -> None:
    """Row-major float32 matrix after a 12-byte header: magic, rows, dim (little endian)."""
    m = np.ascontiguousarray(matrix, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(EMB_MAGIC + struct.pack("<II", *m.shape))
        fh.write(m.tobytes())


def read_embeddings(path: str | Path) -> np.ndarray:
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(4)
        if head == EMB_MAGIC:
            rows, dim = struct.unpack("<II", fh.read(8))
            data = np.frombuffer(fh.read(), dtype="<f4")
            if data.size != rows * dim:
                raise ValueError(f"{path}: expected {rows}x{dim} floats, found {data.size}")
            return data.reshape(rows, dim).astype(np.float64)
    rows = [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]
    arr = np.asarray(rows, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{path}: rows have inconsistent dimensions")
    return arr


# -- aggregation --------------------------------------------------------------


@dataclass
class BenchmarkReport:
    scores: dict[str, dict[str, float]]

    @property
    def task_averages(self) -> dict[str, float]:
        return {t: sum(v.values()) / len(v) for t, v in self.scores.items() if v}

    @property
    def language_averages(self) -> dict[str, float]:
        by_lang: dict[str, list[float]] = {}
        for per_lang in self.scores.values():
            for lang, s in per_lang.items():
                by_lang.setdefault(lang, []).append(s)
        return {lang: sum(v) / len(v) for lang, v in sorted(by_lang.items())}

    def to_json(self) -> dict:
        return {
            "scores": self.scores,
            "task_averages": self.task_averages,
            "language_averages": self.language_averages,
        }

    def render(self) -> str:
        langs = sorted({l for v in self.scores.values() for l in v})
        width = max([len(t) for t in self.scores] + [4])
        head = "task".ljust(width) + "".join(f"{l:>7}" for l in langs) + f"{'Avg.':>7}"
        lines = [head]
        for task, per_lang in self.scores.items():
            cells = "".join(f"{per_lang[l]:7.1f}" if l in per_lang else f"{'-':>7}" for l in langs)
            avg = self.task_averages.get(task)
            lines.append(task.ljust(width) + cells + (f"{avg:7.1f}" if avg is not None else f"{'-':>7}"))
        la = self.language_averages
        lines.append("Avg.".ljust(width) + "".join(f"{la[l]:7.1f}" for l in langs))
        return "\n".join(lines)


def aggregate(scores: Mapping[str, Mapping[str, float]]) -> BenchmarkReport:
    """Arithmetic means over the cells that are present; nothing is imputed."""
    return BenchmarkReport({t: {l: float(s) for l, s in v.items() if s is not None} for t, v in scores.items()})
