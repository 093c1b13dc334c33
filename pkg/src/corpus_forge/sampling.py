"""Temperature-smoothed language sampling and deterministic shard materialization."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Mapping, Sequence

import numpy as np

from . import languages
from .corpus import CleanDocument, count_tokens

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LanguageShare:
    tokens: int
    fraction: float
    probability: float

    @property
    def replication(self) -> float:
        return self.probability / self.fraction if self.fraction > 0 else 0.0


@dataclass(frozen=True)
class SamplingPlan:
    alpha: float
    shares: dict[str, LanguageShare]

    @property
    def total_tokens(self) -> int:
        return sum(s.tokens for s in self.shares.values())

    def probabilities(self) -> dict[str, float]:
        return {lang: s.probability for lang, s in self.shares.items()}

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha,
            "total_tokens": self.total_tokens,
            "languages": {
                lang: {
                    "tokens": s.tokens,
                    "fraction": s.fraction,
                    "probability": s.probability,
                    "replication": s.replication,
                }
                for lang, s in sorted(self.shares.items())
            },
        }

    @classmethod
    def from_json(cls, obj: dict) -> SamplingPlan:
        return cls(
            alpha=obj["alpha"],
            shares={
                lang: LanguageShare(v["tokens"], v["fraction"], v["probability"])
                for lang, v in obj["languages"].items()
            },
        )


def temperature_plan(counts: Mapping[str, int], alpha: float = 0.3) -> SamplingPlan:
    """p_l = q_l**alpha / sum_j q_j**alpha with q_l = n_l / N.

    Evaluated as n_l**alpha / sum_j n_j**alpha (the N**alpha factor cancels),
    which makes alpha = 1 reproduce n_l / N exactly.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if any(n < 0 for n in counts.values()):
        raise ValueError("token counts must be non-negative")
    total = sum(counts.values())
    if total == 0:
        raise ValueError("all language counts are zero")
    fractions = {lang: n / total for lang, n in counts.items()}
    weights = {lang: (float(n) ** alpha if n > 0 else 0.0) for lang, n in counts.items()}
    norm = math.fsum(weights.values())
    shares = {}
    for lang in sorted(counts):
        if counts[lang] == 0:
            logger.warning("language %s has no tokens and will not be sampled", lang)
        shares[lang] = LanguageShare(counts[lang], fractions[lang], weights[lang] / norm)
    return SamplingPlan(alpha, shares)


def _doc_line(doc: CleanDocument, lang_token: bool) -> str:
    text = " ".join(" ".join(p.split()) for p in doc.paragraphs)
    return prepend_lang_token(doc, text) if lang_token else text


def prepend_lang_token(doc: CleanDocument, text: str | None = None) -> str:
    """``<xx> text``; not idempotent, apply once."""
    token = languages.lang_token(doc.lang)
    return f"{token} {doc.text if text is None else text}"


def sample_documents(
    docs_by_lang: Mapping[str, Sequence[CleanDocument]],
    plan: SamplingPlan,
    seed: int,
    target_tokens: int,
) -> Iterator[CleanDocument]:
    """Draw documents until ``target_tokens`` whitespace tokens have been emitted.

    A language is picked with probability proportional to p_l / mean_doc_tokens_l,
    so that each language's expected share of emitted *tokens* is p_l; a
    document is then drawn uniformly (with replacement) within that language.
    """
    missing = [lang for lang in docs_by_lang if docs_by_lang[lang] and lang not in plan.shares]
    if missing:
        raise ValueError(f"plan does not cover languages: {missing}")
    langs = [l for l in sorted(docs_by_lang) if docs_by_lang[l] and plan.shares[l].probability > 0]
    if not langs:
        return
    lengths = {l: np.array([sum(count_tokens(p) for p in d.paragraphs) for d in docs_by_lang[l]]) for l in langs}
    weights = np.array([plan.shares[l].probability / max(lengths[l].mean(), 1e-12) for l in langs])
    weights = weights / weights.sum()
    if target_tokens < max(int(v.max()) for v in lengths.values()):
        logger.warning("target of %d tokens is smaller than the largest document", target_tokens)
    rng = np.random.default_rng(seed)
    cumulative = np.cumsum(weights)
    emitted = 0
    batch = 4096
    while emitted < target_tokens:
        lang_draws = np.searchsorted(cumulative, rng.random(batch), side="right")
        doc_draws = rng.random(batch)
        for li, u in zip(lang_draws, doc_draws):
            lang = langs[min(li, len(langs) - 1)]
            j = int(u * len(docs_by_lang[lang]))
            emitted += int(lengths[lang][j])
            yield docs_by_lang[lang][j]
            if emitted >= target_tokens:
                return


def materialize(
    docs_by_lang: Mapping[str, Sequence[CleanDocument]],
    plan: SamplingPlan,
    seed: int,
    target_tokens: int,
    out_dir: str | Path,
    docs_per_shard: int = 100_000,
    lang_token: bool = True,
) -> dict:
    """Write sampled documents as text shards, one document per line."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    counts: dict[str, int] = {}
    tokens: dict[str, int] = {}
    shards: list[str] = []
    fh = None
    n = 0
    try:
        for doc in sample_documents(docs_by_lang, plan, seed, target_tokens):
            if n % docs_per_shard == 0:
                if fh:
                    fh.close()
                name = f"shard-{len(shards):05d}.txt"
                shards.append(name)
                fh = open(out_dir / name, "w", encoding="utf-8", newline="\n")
            fh.write(_doc_line(doc, lang_token) + "\n")
            counts[doc.lang] = counts.get(doc.lang, 0) + 1
            tokens[doc.lang] = tokens.get(doc.lang, 0) + sum(count_tokens(p) for p in doc.paragraphs)
            n += 1
    finally:
        if fh:
            fh.close()
    return {"shards": shards, "documents": dict(sorted(counts.items())), "tokens": dict(sorted(tokens.items()))}
