"""Unicode script classification, native-script ratio and Brahmi to Devanagari conversion.

Only letters count towards a script profile: codepoints of general category
L*, plus combining marks (M*) that sit inside a known script block, so that
Indic vowel signs and viramas are counted with their consonants. Whitespace,
digits, punctuation and symbols are ignored.
"""

from __future__ import annotations

import unicodedata
from bisect import bisect_right
from collections import Counter
from dataclasses import dataclass, field

OTHER = "Other"

# (start, end inclusive, script)
_RANGES: list[tuple[int, int, str]] = sorted(
    [
        (0x0041, 0x005A, "Latn"),
        (0x0061, 0x007A, "Latn"),
        (0x00AA, 0x00AA, "Latn"),
        (0x00BA, 0x00BA, "Latn"),
        (0x00C0, 0x00D6, "Latn"),
        (0x00D8, 0x00F6, "Latn"),
        (0x00F8, 0x024F, "Latn"),
        (0x1E00, 0x1EFF, "Latn"),
        (0x0600, 0x06FF, "Arab"),
        (0x0750, 0x077F, "Arab"),
        (0x08A0, 0x08FF, "Arab"),
        (0xFB50, 0xFDFF, "Arab"),
        (0xFE70, 0xFEFF, "Arab"),
        (0x0900, 0x097F, "Deva"),
        (0xA8E0, 0xA8FF, "Deva"),
        (0x0980, 0x09FF, "Beng"),
        (0x0A00, 0x0A7F, "Guru"),
        (0x0A80, 0x0AFF, "Gujr"),
        (0x0B00, 0x0B7F, "Orya"),
        (0x0B80, 0x0BFF, "Taml"),
        (0x0C00, 0x0C7F, "Telu"),
        (0x0C80, 0x0CFF, "Knda"),
        (0x0D00, 0x0D7F, "Mlym"),
        (0x1C50, 0x1C7F, "Olck"),
        (0xAAE0, 0xAAFF, "Mtei"),
        (0xABC0, 0xABFF, "Mtei"),
    ]
)
_STARTS = [r[0] for r in _RANGES]

SCRIPTS: tuple[str, ...] = (
    "Deva", "Beng", "Gujr", "Guru", "Knda", "Mlym", "Orya",
    "Taml", "Telu", "Arab", "Latn", "Olck", "Mtei", OTHER,
)

# Brahmi-derived scripts whose Unicode blocks share the ISCII-derived layout.
BRAHMI_BLOCKS: dict[str, int] = {
    "Deva": 0x0900,
    "Beng": 0x0980,
    "Guru": 0x0A00,
    "Gujr": 0x0A80,
    "Orya": 0x0B00,
    "Taml": 0x0B80,
    "Telu": 0x0C00,
    "Knda": 0x0C80,
    "Mlym": 0x0D00,
}
# Offsets 0x00-0x6F hold the shared sign/letter/matra/digit layout; the tail is script specific.
_SHARED_LAYOUT_END = 0x70


class UnsupportedScriptError(ValueError):
    pass


def script_of_char(ch: str) -> str:
    cp = ord(ch)
    i = bisect_right(_STARTS, cp) - 1
    if i >= 0:
        start, end, script = _RANGES[i]
        if cp <= end:
            return script
    return OTHER


_letter_cache: dict[str, str | None] = {}


def letter_script(ch: str) -> str | None:
    """Script of ``ch`` if it counts as a letter, else None."""
    try:
        return _letter_cache[ch]
    except KeyError:
        pass
    cat = unicodedata.category(ch)
    script = script_of_char(ch)
    if cat[0] == "L":
        result: str | None = script
    elif cat[0] == "M" and script != OTHER:
        result = script
    else:
        result = None
    if len(_letter_cache) < 1 << 16:
        _letter_cache[ch] = result
    return result


@dataclass
class ScriptProfile:
    counts: Counter = field(default_factory=Counter)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def __getitem__(self, script: str) -> int:
        return self.counts.get(script, 0)

    def __add__(self, other: ScriptProfile) -> ScriptProfile:
        return ScriptProfile(self.counts + other.counts)


def script_profile(text: str) -> ScriptProfile:
    counts: Counter = Counter()
    for ch in text:
        s = letter_script(ch)
        if s is not None:
            counts[s] += 1
    return ScriptProfile(counts)


def native_ratio(text: str, expected_script: str) -> float:
    """Fraction of letters in ``expected_script``; 0.0 when the text has no letters."""
    if expected_script not in SCRIPTS:
        raise UnsupportedScriptError(f"unknown script id {expected_script!r}")
    profile = script_profile(text)
    total = profile.total
    if total == 0:
        return 0.0
    return profile[expected_script] / total


def _aligned_target(cp: int, base: int) -> int | None:
    rel = cp - base
    target = 0x0900 + rel
    src, tgt = chr(cp), chr(target)
    src_name = unicodedata.name(src, "")
    tgt_name = unicodedata.name(tgt, "")
    if not src_name or not tgt_name:
        return None
    if src_name.split(" ", 1)[1:] == tgt_name.split(" ", 1)[1:]:
        return target
    if rel < _SHARED_LAYOUT_END and unicodedata.category(src)[0] == unicodedata.category(tgt)[0]:
        return target
    return None


_conversion_tables: dict[str, dict[int, int | None]] = {}


def _conversion_table(script: str) -> dict[int, int | None]:
    table = _conversion_tables.get(script)
    if table is None:
        base = BRAHMI_BLOCKS[script]
        table = {cp: _aligned_target(cp, base) for cp in range(base, base + 0x80)}
        _conversion_tables[script] = table
    return table


def convert_to_devanagari(text: str, source_script: str) -> tuple[str, Counter]:
    """Map a Brahmi-script text onto the Devanagari block by fixed block offset.

    Returns the converted text and a counter of source-block characters that
    have no aligned Devanagari counterpart and were passed through unchanged.
    Characters outside the source block are left untouched.
    """
    if source_script not in BRAHMI_BLOCKS:
        raise UnsupportedScriptError(
            f"cannot convert {source_script!r} to Devanagari; Brahmi scripts only"
        )
    if source_script == "Deva":
        return text, Counter()
    table = _conversion_table(source_script)
    passed: Counter = Counter()
    out = []
    for ch in text:
        cp = ord(ch)
        if cp in table:
            target = table[cp]
            if target is None:
                passed[ch] += 1
                out.append(ch)
            else:
                out.append(chr(target))
        else:
            out.append(ch)
    return "".join(out), passed


def to_devanagari(text: str, source_script: str) -> str:
    return convert_to_devanagari(text, source_script)[0]
