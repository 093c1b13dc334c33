"""Random mixed-script documents and blacklists for filter property checks."""

from __future__ import annotations

import numpy as np

from corpus_forge.corpus import CleanDocument

DEVA = ["राम", "घर", "गया", "वह", "सो", "नमस्ते", "दुनिया", "काम", "पानी", "बात"]
LATN = ["the", "Foo", "bar", "BAZ", "qux", "ok"]
PUNCT = [",", ";", "\"", "(", ")", "-", "«", "»"]
DELIMS = ["।", ".", "!", "?", "॥", "\n"]
VOCAB = DEVA + LATN


def random_word(rng: np.random.Generator) -> str:
    r = rng.random()
    if r < 0.6:
        w = DEVA[int(rng.integers(len(DEVA)))]
    elif r < 0.9:
        w = LATN[int(rng.integers(len(LATN)))]
    else:
        w = PUNCT[int(rng.integers(len(PUNCT)))] * int(rng.integers(1, 3))
    if rng.random() < 0.15:
        w = w + PUNCT[int(rng.integers(len(PUNCT)))]
    return w


def random_sentence(rng: np.random.Generator, max_words: int = 9) -> str:
    words = [random_word(rng) for _ in range(int(rng.integers(0, max_words + 1)))]
    return " ".join(words) + DELIMS[int(rng.integers(len(DELIMS)))]


def random_document(rng: np.random.Generator, doc_id: str = "r", lang: str = "hi") -> CleanDocument:
    paragraphs = []
    for _ in range(int(rng.integers(1, 4))):
        p = " ".join(random_sentence(rng) for _ in range(int(rng.integers(1, 6)))).strip()
        if p:
            paragraphs.append(p)
    return CleanDocument(doc_id, lang, paragraphs or ["x"])


def random_blacklist_entries(rng: np.random.Generator) -> list[str]:
    entries = []
    for _ in range(int(rng.integers(1, 6))):
        n = 1 if rng.random() < 0.5 else int(rng.integers(2, 4))
        entries.append(" ".join(VOCAB[int(rng.integers(len(VOCAB)))] for _ in range(n)))
    return entries


def naive_matches(entries: list[str], sentence: str) -> bool:
    """Quadratic scan: any entry's token sequence occurs as a contiguous run of the sentence's tokens."""
    def toks(s: str) -> list[str]:
        out = []
        for raw in s.split():
            t = "".join(raw).strip("".join(PUNCT) + "।.!?॥").casefold()
            if t:
                out.append(t)
        return out

    sent = toks(sentence)
    for entry in entries:
        pat = toks(entry)
        if not pat:
            continue
        for i in range(len(sent) - len(pat) + 1):
            if sent[i : i + len(pat)] == pat:
                return True
    return False
