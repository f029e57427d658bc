"""Unicode approximation model (UAM): compose, validate and repair strings.

Recognized pieces are joined and NFC-normalized into a candidate string.  A
candidate is *valid* when its case-folded form appears in a reference
wordlist, optionally restricted to one language.  Invalid candidates are
repaired to the nearest wordlist entry within a bounded edit distance.
"""

from __future__ import annotations

import enum
import unicodedata
from dataclasses import dataclass

from .corpus import _read_utf8_lines, fold
from .errors import EmptyInput, ParseError
from .lexicon import BKTree

__all__ = ["Status", "UamString", "ValidUamDb", "map_segments", "classify", "repair"]


class Status(enum.Enum):
    UNCLASSIFIED = "unclassified"
    VALID = "valid"
    INVALID = "invalid"
    REPAIRED = "repaired"


@dataclass(frozen=True)
class UamString:
    text: str
    status: Status = Status.UNCLASSIFIED
    original: str | None = None
    distance: int | None = None

    def __post_init__(self):
        if unicodedata.normalize("NFC", self.text) != self.text:
            raise ValueError("UamString text must be NFC")

    def to_dict(self):
        return {"text": self.text, "status": self.status.value,
                "original": self.original, "distance": self.distance}


class ValidUamDb:
    """Reference wordlists partitioned by language tag.

    Membership is tested on folded keys; each key remembers the first
    spelling it was added with so repairs return a readable form.
    """

    def __init__(self, entries=()):
        self._forms = {}
        self._by_lang = {}
        for lang, word in entries:
            self.add(lang, word)
        self._index = None

    def add(self, lang, word):
        word = unicodedata.normalize("NFC", word)
        if not word:
            raise ValueError("empty wordlist entry")
        key = fold(word)
        self._forms.setdefault(key, word)
        self._by_lang.setdefault(lang, set()).add(key)
        self._index = None

    def __len__(self):
        return len(self._forms)

    def __contains__(self, text):
        return fold(text) in self._forms

    @property
    def languages(self):
        return sorted(self._by_lang)

    def keys(self, lang=None):
        if lang is None:
            return set(self._forms)
        return set(self._by_lang.get(lang, ()))

    def form(self, key):
        return self._forms[key]

    def contains(self, text, lang=None):
        key = fold(text)
        if lang is None:
            return key in self._forms
        return key in self._by_lang.get(lang, ())

    def near(self, text, radius, lang=None):
        """``(distance, key)`` pairs within ``radius`` of the folded text."""
        if self._index is None:
            self._index = BKTree(sorted(self._forms), key=lambda k: k)
        hits = self._index.query(fold(text), radius)
        if lang is not None:
            allowed = self._by_lang.get(lang, set())
            hits = [(d, k) for d, k in hits if k in allowed]
        return hits

    @classmethod
    def load(cls, path):
        entries = []
        for lineno, line in _read_utf8_lines(path):
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 2 or not cols[1]:
                raise ParseError(lineno, "expected lang<TAB>word")
            entries.append((cols[0], cols[1]))
        return cls(entries)

    @classmethod
    def from_medicine_db(cls, db):
        return cls((e.lang, e.name) for e in db)

    def save(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for lang in self.languages:
                for key in sorted(self._by_lang[lang]):
                    fh.write(f"{lang}\t{self._forms[key]}\n")


def map_segments(pieces):
    """Join recognized pieces in order and normalize to NFC."""
    pieces = list(pieces)
    if not pieces or any(not p for p in pieces):
        raise EmptyInput("mapper needs at least one non-empty piece")
    return UamString(unicodedata.normalize("NFC", "".join(pieces)))


def classify(s, db, lang=None):
    status = Status.VALID if db.contains(s.text, lang) else Status.INVALID
    return UamString(s.text, status, s.original, s.distance)


def repair(s, db, max_dist=2, lang=None):
    """Replace an invalid string by its nearest wordlist entry.

    Ties go to the shorter entry, then the lexicographically smaller one.
    Valid strings come back untouched; strings with no entry within
    ``max_dist`` come back unchanged and invalid.
    """
    if max_dist < 1:
        raise ValueError("max_dist must be >= 1")
    if s.status is Status.UNCLASSIFIED:
        s = classify(s, db, lang)
    if s.status is not Status.INVALID:
        return s
    hits = db.near(s.text, max_dist, lang)
    if not hits:
        return s
    d, key = min(hits, key=lambda h: (h[0], len(h[1]), h[1]))
    return UamString(db.form(key), Status.REPAIRED, original=s.text, distance=d)
