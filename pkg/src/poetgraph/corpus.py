"""Corpus ingestion, Persian-script normalization, tokenization and filtering.

The corpus file is JSON Lines: one poet object per line with keys
``poet_id``, ``name``, ``birth_year_hijri`` (nullable) and ``poems``; each
poem has ``poem_id``, optional ``title`` and ``meter_label``, ``verses`` (a
list of hemistich strings) and optional ``pos_tags`` (one tag list per verse).
"""
from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Optional

from .errors import CorpusError

# Arabic-script variants -> Persian forms, Arabic-Indic / extended digits -> ASCII.
CHAR_MAP = {
    0x064A: "ی",  # ARABIC YEH -> FARSI YEH
    0x0643: "ک",  # ARABIC KAF -> KEHEH
    0x0629: "ه",  # TEH MARBUTA -> HEH
    0x0623: "ا",  # ALEF WITH HAMZA ABOVE -> ALEF
    0x0625: "ا",  # ALEF WITH HAMZA BELOW -> ALEF
    0x0624: "و",  # WAW WITH HAMZA ABOVE -> WAW
}
CHAR_MAP.update({0x0660 + d: str(d) for d in range(10)})
CHAR_MAP.update({0x06F0 + d: str(d) for d in range(10)})

DIACRITICS = frozenset(range(0x064B, 0x0653)) | {0x0670}

ARABIC_PUNCT = frozenset("،؛؟«»")

_TRANSLATE = dict(CHAR_MAP)
_TRANSLATE.update({cp: None for cp in DIACRITICS})


def is_punct(ch: str) -> bool:
    return ch in ARABIC_PUNCT or unicodedata.category(ch).startswith("P")


def _is_invisible(ch: str) -> bool:
    # Format characters (ZWNJ, ZWJ, bidi marks, BOM, ...) and non-whitespace controls.
    cat = unicodedata.category(ch)
    if cat == "Cf":
        return True
    return cat == "Cc" and not ch.isspace()


@dataclass(frozen=True)
class PoemRecord:
    poem_id: str
    verses: tuple
    title: Optional[str] = None
    meter_label: Optional[str] = None
    pos_tags: Optional[tuple] = None

    def __post_init__(self):
        if not self.verses:
            raise CorpusError(f"poem {self.poem_id!r} has no verses")
        if self.meter_label is not None and not self.meter_label.strip():
            raise CorpusError(f"poem {self.poem_id!r} has a blank meter_label")


@dataclass(frozen=True)
class PoetRecord:
    poet_id: str
    name: str
    poems: tuple
    birth_year_hijri: Optional[int] = None

    @property
    def verse_count(self) -> int:
        return sum(len(p.verses) for p in self.poems)

    def iter_verses(self):
        for poem in self.poems:
            yield from poem.verses


@dataclass(frozen=True)
class Corpus:
    poets: tuple = ()
    source_path: str = ""
    normalization_applied: bool = False

    def __len__(self):
        return len(self.poets)

    @property
    def poet_ids(self) -> list[str]:
        return [p.poet_id for p in self.poets]


def _poem_from_obj(obj: dict) -> PoemRecord:
    tags = obj.get("pos_tags")
    meter = obj.get("meter_label")
    if isinstance(meter, str):
        meter = meter.strip()
    return PoemRecord(
        poem_id=str(obj["poem_id"]),
        title=obj.get("title"),
        meter_label=meter,
        verses=tuple(str(v) for v in obj["verses"]),
        pos_tags=tuple(tuple(t) for t in tags) if tags is not None else None,
    )


def _poet_from_obj(obj: dict) -> PoetRecord:
    year = obj.get("birth_year_hijri")
    return PoetRecord(
        poet_id=str(obj["poet_id"]),
        name=str(obj.get("name", obj["poet_id"])),
        birth_year_hijri=int(year) if year is not None else None,
        poems=tuple(_poem_from_obj(p) for p in obj.get("poems", [])),
    )


def make_corpus(poets: Iterable[PoetRecord], source_path: str = "",
                normalization_applied: bool = False) -> Corpus:
    """Build a Corpus, enforcing unique ids and sorting poets by id."""
    seen = set()
    for p in poets:
        if p.poet_id in seen:
            raise CorpusError(f"duplicate poet_id {p.poet_id!r}")
        seen.add(p.poet_id)
    ordered = tuple(sorted(poets, key=lambda p: p.poet_id))
    return Corpus(ordered, source_path, normalization_applied)


def load_corpus(path) -> Corpus:
    path = Path(path)
    poets = []
    seen = {}
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                poet = _poet_from_obj(json.loads(line))
            except CorpusError as exc:
                raise CorpusError(f"{path}:{lineno}: {exc}") from exc
            except (ValueError, KeyError, TypeError) as exc:
                raise CorpusError(f"{path}:{lineno}: cannot parse poet record: {exc}") from exc
            if poet.poet_id in seen:
                raise CorpusError(
                    f"duplicate poet_id {poet.poet_id!r} (lines {seen[poet.poet_id]} and {lineno})")
            seen[poet.poet_id] = lineno
            poets.append(poet)
    return make_corpus(poets, source_path=str(path))


def _poet_to_obj(poet: PoetRecord) -> dict:
    poems = []
    for p in poet.poems:
        d = {"poem_id": p.poem_id, "verses": list(p.verses)}
        if p.title is not None:
            d["title"] = p.title
        if p.meter_label is not None:
            d["meter_label"] = p.meter_label
        if p.pos_tags is not None:
            d["pos_tags"] = [list(t) for t in p.pos_tags]
        poems.append(d)
    return {"poet_id": poet.poet_id, "name": poet.name,
            "birth_year_hijri": poet.birth_year_hijri, "poems": poems}


def save_corpus(corpus: Corpus, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for poet in corpus.poets:
            fh.write(json.dumps(_poet_to_obj(poet), ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def _collapse_punct(text: str) -> str:
    out = []
    for ch in text:
        if out and ch == out[-1] and is_punct(ch):
            continue
        out.append(ch)
    return "".join(out)


def normalize_text(raw: str) -> str:
    """Map Arabic-script variants to Persian forms and clean up the string.

    Steps, in order: character mapping, removal of harakat (U+064B-U+0652) and
    superscript alef (U+0670), deletion of zero-width and other invisible
    format/control characters, whitespace collapse with trimming, and
    collapse of runs of a repeated punctuation character.
    """
    s = raw.translate(_TRANSLATE)
    s = "".join(ch for ch in s if not _is_invisible(ch))
    s = " ".join(s.split())
    return _collapse_punct(s)


def normalize_corpus(corpus: Corpus) -> Corpus:
    if corpus.normalization_applied:
        raise CorpusError("corpus is already normalized")
    poets = []
    for poet in corpus.poets:
        poems = tuple(replace(p, verses=tuple(normalize_text(v) for v in p.verses))
                      for p in poet.poems)
        poets.append(replace(poet, poems=poems))
    return Corpus(tuple(poets), corpus.source_path, True)


def filter_poets(corpus: Corpus, min_lines: int) -> Corpus:
    """Keep poets whose total number of stored verse lines is at least ``min_lines``."""
    if min_lines < 1:
        raise CorpusError("min_lines must be a positive integer")
    kept = tuple(p for p in corpus.poets if p.verse_count >= min_lines)
    return replace(corpus, poets=kept)


def tokenize(text: str) -> list[str]:
    tokens = []
    for raw in text.split():
        start, end = 0, len(raw)
        while start < end and is_punct(raw[start]):
            start += 1
        while end > start and is_punct(raw[end - 1]):
            end -= 1
        if start < end:
            tokens.append(raw[start:end])
    return tokens


def poet_tokens(poet: PoetRecord) -> list[str]:
    """All tokens of a poet, verses concatenated in stored order."""
    out = []
    for verse in poet.iter_verses():
        out.extend(tokenize(verse))
    return out
