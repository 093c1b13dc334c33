"""The 24 corpus languages with their primary script, family and resource class."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Language:
    code: str
    name: str
    script: str
    family: str
    taxonomy_class: int


# Script ids are ISO 15924 codes.
LANGUAGES: tuple[Language, ...] = (
    Language("as", "Assamese", "Beng", "Indo-European", 2),
    Language("brx", "Bodo", "Deva", "Sino-Tibetan", 1),
    Language("bn", "Bengali", "Beng", "Indo-European", 5),
    Language("doi", "Dogri", "Deva", "Indo-European", 1),
    Language("en", "English", "Latn", "Germanic", 5),
    Language("gom", "Konkani", "Deva", "Indo-European", 1),
    Language("gu", "Gujarati", "Gujr", "Indo-European", 4),
    Language("hi", "Hindi", "Deva", "Indo-European", 5),
    Language("kha", "Khasi", "Latn", "Austroasiatic", 1),
    Language("kn", "Kannada", "Knda", "Dravidian", 4),
    Language("ks", "Kashmiri", "Arab", "Indo-European", 1),
    Language("mai", "Maithili", "Deva", "Indo-European", 1),
    Language("ml", "Malayalam", "Mlym", "Dravidian", 4),
    Language("mni", "Manipuri", "Mtei", "Sino-Tibetan", 1),
    Language("mr", "Marathi", "Deva", "Indo-European", 4),
    Language("ne", "Nepali", "Deva", "Indo-European", 2),
    Language("or", "Odia", "Orya", "Indo-European", 3),
    Language("pa", "Punjabi", "Guru", "Indo-European", 3),
    Language("sa", "Sanskrit", "Deva", "Indo-European", 2),
    Language("sat", "Santali", "Olck", "Austroasiatic", 1),
    Language("sd", "Sindhi", "Arab", "Indo-European", 1),
    Language("ta", "Tamil", "Taml", "Dravidian", 4),
    Language("te", "Telugu", "Telu", "Dravidian", 4),
    Language("ur", "Urdu", "Arab", "Indo-European", 5),
)

BY_CODE: dict[str, Language] = {lang.code: lang for lang in LANGUAGES}
CODES: tuple[str, ...] = tuple(BY_CODE)


class UnknownLanguageError(KeyError):
    pass


def get(code: str) -> Language:
    try:
        return BY_CODE[code]
    except KeyError:
        raise UnknownLanguageError(code) from None


def is_known(code: str | None) -> bool:
    return code in BY_CODE


def script_of(code: str) -> str:
    return get(code).script


def languages_for_script(script: str) -> list[str]:
    return [lang.code for lang in LANGUAGES if lang.script == script]


def unique_script_languages() -> list[str]:
    """Languages that are the only table entry written in their script."""
    return [lang.code for lang in LANGUAGES if len(languages_for_script(lang.script)) == 1]


def lang_token(code: str) -> str:
    get(code)
    return f"<{code}>"
