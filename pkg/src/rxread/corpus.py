"""Synthetic word corpus, dataset splitting and database loading."""

from __future__ import annotations

import math
import string
import unicodedata
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import imaging
from .errors import DuplicateId, ParseError, UnknownGlyph, UnknownId
from .glyphs import GLYPH_ROWS

__all__ = [
    "Charset",
    "Sample",
    "MedicineEntry",
    "MedicineDb",
    "TransactionDb",
    "DEVANAGARI_DEMO",
    "default_charset",
    "render_word_image",
    "prepare_word",
    "render_word",
    "render_page",
    "sample_seed",
    "render_corpus",
    "random_words",
    "corrupt_word",
    "split_dataset",
    "load_medicine_db",
    "dump_medicine_db",
    "load_transactions",
    "read_wordlist",
    "fold",
]

DEVANAGARI_DEMO = "कटडनपमरलसािीेो"

INPUT_H = 32
INPUT_W = 128


def fold(text):
    """Canonical comparison key: NFC, case-folded, NFC again."""
    return unicodedata.normalize("NFC", unicodedata.normalize("NFC", text).casefold())


class Charset:
    """Ordered codepoint alphabet; the CTC blank is the extra last class."""

    def __init__(self, codepoints):
        codepoints = list(codepoints)
        for cp in codepoints:
            if not isinstance(cp, str) or len(cp) != 1:
                raise ValueError(f"charset entries must be single codepoints, got {cp!r}")
        if len(set(codepoints)) != len(codepoints):
            raise ValueError("charset contains duplicate codepoints")
        if not codepoints:
            raise ValueError("charset is empty")
        self.codepoints = tuple(codepoints)
        self._index = {cp: i for i, cp in enumerate(self.codepoints)}

    @property
    def blank_index(self):
        return len(self.codepoints)

    @property
    def num_classes(self):
        return len(self.codepoints) + 1

    def __len__(self):
        return len(self.codepoints)

    def __contains__(self, cp):
        return cp in self._index

    def __eq__(self, other):
        return isinstance(other, Charset) and other.codepoints == self.codepoints

    def __hash__(self):
        return hash(self.codepoints)

    def __repr__(self):
        return f"Charset({''.join(self.codepoints)!r})"

    def index(self, cp):
        try:
            return self._index[cp]
        except KeyError:
            raise UnknownGlyph(cp) from None

    def encode(self, word):
        return [self.index(cp) for cp in word]

    def decode(self, indices):
        return "".join(self.codepoints[i] for i in indices)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        return cls(lines)

    def save(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("".join(cp + "\n" for cp in self.codepoints))


def default_charset():
    return Charset(string.ascii_lowercase + string.digits + "-" + DEVANAGARI_DEMO)


@dataclass(frozen=True)
class Sample:
    image: np.ndarray
    label: tuple
    source_word: str


def render_word_image(word, atlas, rng):
    """Draw ``word`` onto a white canvas with pen-style jitter.

    Stroke scale, ink darkness, letter spacing, baseline offsets and bold
    strokes are all drawn from ``rng``.  Returns the raw normalized canvas.
    """
    if not word:
        raise ValueError("cannot render an empty word")
    missing = atlas.missing(word)
    if missing:
        raise UnknownGlyph(missing[0])
    scale = int(rng.integers(2, 4))
    ink = float(rng.uniform(0.0, 0.15))
    pieces = []
    for ch in word:
        bm = np.kron(atlas[ch], np.ones((scale, scale), dtype=bool))
        if rng.random() < 0.3:
            bm = bm | np.pad(bm, ((0, 0), (1, 0)))[:, :-1]
        shift = int(rng.integers(-1, 2))
        gap = int(rng.integers(scale, 2 * scale + 1))
        pieces.append((bm, shift, gap))
    margin = 4 + scale
    height = GLYPH_ROWS * scale + 2 * margin
    width = sum(bm.shape[1] + gap for bm, _, gap in pieces) + 2 * margin
    canvas = np.ones((height, width))
    x = margin
    for bm, shift, gap in pieces:
        y = margin + shift
        h, w = bm.shape
        region = canvas[y:y + h, x:x + w]
        region[bm] = ink
        x += w + gap
    noise = rng.normal(0.0, 0.03, size=canvas.shape)
    return np.clip(canvas + noise, 0.0, 1.0)


def prepare_word(img, smooth_radius=1, ink_threshold=0.6, out_h=INPUT_H, out_w=INPUT_W):
    """Smooth, crop to the ink and standardize, as the recognizer expects."""
    smoothed = imaging.smooth(img, smooth_radius)
    box = imaging.ink_bbox(smoothed, ink_threshold)
    if box is None:
        return np.full((out_h, out_w), imaging.BACKGROUND)
    x0, y0, x1, y1 = box
    return imaging.standardize(smoothed[y0:y1, x0:x1], out_h, out_w)


def render_word(word, charset, atlas, jitter_seed):
    """Render one training sample for ``word``; a pure function of its inputs."""
    label = tuple(charset.encode(word))
    rng = np.random.default_rng(jitter_seed)
    image = prepare_word(render_word_image(word, atlas, rng))
    return Sample(image=image, label=label, source_word=word)


def render_page(lines, atlas, seed, word_gap=24, line_gap=16):
    """Compose a page image from lines of words.

    ``word_gap`` blank columns separate words and ``line_gap`` blank rows
    separate lines, so projection-profile segmentation recovers the layout.
    Returns the normalized page and the ground-truth word boxes of the
    un-smoothed ink in reading order.
    """
    rng = np.random.default_rng(seed)
    rendered = []
    for line in lines:
        row = []
        for word in line:
            img = render_word_image(word, atlas, rng)
            box = imaging.ink_bbox(img, 0.5)
            x0, y0, x1, y1 = box
            row.append(img[y0:y1, x0:x1])
        rendered.append(row)
    margin = word_gap
    width = max((sum(w.shape[1] for w in row) + word_gap * (len(row) - 1) for row in rendered),
                default=1) + 2 * margin
    height = sum(max((w.shape[0] for w in row), default=1) for row in rendered)
    height += line_gap * max(len(rendered) - 1, 0) + 2 * margin
    page = np.ones((height, width))
    boxes = []
    y = margin
    for row in rendered:
        x = margin
        line_h = max((w.shape[0] for w in row), default=1)
        for word_img in row:
            h, w = word_img.shape
            page[y:y + h, x:x + w] = np.minimum(page[y:y + h, x:x + w], word_img)
            boxes.append((x, y, x + w, y + h))
            x += w + word_gap
        y += line_h + line_gap
    return page, boxes


def sample_seed(seed, *keys):
    """Derive an independent 32-bit jitter seed from a base seed and integer keys."""
    return int(np.random.SeedSequence([seed, *keys]).generate_state(1)[0])


def render_corpus(words, charset, atlas, seed, renders_per_word=1):
    """Render every word ``renders_per_word`` times with per-sample derived seeds."""
    return [render_word(word, charset, atlas, sample_seed(seed, i, k))
            for i, word in enumerate(words) for k in range(renders_per_word)]


def random_words(n, alphabet, min_len, max_len, seed):
    """``n`` strings drawn uniformly from ``alphabet`` with uniform lengths."""
    rng = np.random.default_rng(seed)
    alphabet = list(alphabet)
    words = []
    for _ in range(n):
        length = rng.integers(min_len, max_len + 1)
        words.append("".join(alphabet[j] for j in rng.integers(len(alphabet), size=length)))
    return words


def corrupt_word(word, alphabet, rng):
    """Substitute one randomly chosen codepoint with a different one from ``alphabet``."""
    if not word:
        raise ValueError("cannot corrupt an empty word")
    i = int(rng.integers(len(word)))
    choices = [c for c in alphabet if c != word[i]]
    return word[:i] + choices[int(rng.integers(len(choices)))] + word[i + 1:]


def split_dataset(samples, train_fraction=0.9, seed=0):
    """Seeded shuffle, then the first ``floor(n * train_fraction)`` go to training."""
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must lie in (0, 1)")
    samples = list(samples)
    n = len(samples)
    if n == 0:
        return [], []
    order = np.random.default_rng(seed).permutation(n)
    n_train = math.floor(n * train_fraction)
    train = [samples[i] for i in order[:n_train]]
    test = [samples[i] for i in order[n_train:]]
    return train, test


@dataclass(frozen=True)
class MedicineEntry:
    id: str
    name: str
    lang: str
    description: str


class MedicineDb:
    """Immutable medicine lexicon with id and folded-name indexes."""

    def __init__(self, entries):
        self.entries = tuple(entries)
        self._by_id = {}
        self._by_name = {}
        for e in self.entries:
            if e.id in self._by_id:
                raise DuplicateId(None, e.id)
            self._by_id[e.id] = e
            self._by_name.setdefault(fold(e.name), []).append(e)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __contains__(self, med_id):
        return med_id in self._by_id

    def get(self, med_id):
        return self._by_id[med_id]

    def lookup_name(self, name):
        """Entries whose name equals ``name`` after NFC and case folding."""
        return list(self._by_name.get(fold(name), ()))

    @property
    def ids(self):
        return [e.id for e in self.entries]


def _read_utf8_lines(path):
    raw = Path(path).read_bytes()
    lines = raw.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()
    for lineno, line in enumerate(lines, 1):
        try:
            yield lineno, line.decode("utf-8").rstrip("\r")
        except UnicodeDecodeError as exc:
            raise ParseError(lineno, f"invalid UTF-8 ({exc.reason})") from None


def load_medicine_db(path):
    """Parse the ``id<TAB>name<TAB>lang<TAB>description`` medicine table."""
    entries = []
    seen = set()
    for lineno, line in _read_utf8_lines(path):
        if not line.strip() or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 4:
            raise ParseError(lineno, f"expected 4 tab-separated columns, got {len(cols)}")
        med_id, name, lang, description = cols
        if not med_id:
            raise ParseError(lineno, "empty id")
        name = unicodedata.normalize("NFC", name)
        if not name:
            raise ParseError(lineno, "empty name")
        if med_id in seen:
            raise DuplicateId(lineno, med_id)
        seen.add(med_id)
        entries.append(MedicineEntry(med_id, name, lang,
                                     unicodedata.normalize("NFC", description)))
    return MedicineDb(entries)


def dump_medicine_db(db, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for e in db:
            fh.write(f"{e.id}\t{e.name}\t{e.lang}\t{e.description}\n")


class TransactionDb:
    """Historical prescriptions, each a frozenset of medicine ids."""

    def __init__(self, transactions):
        self.transactions = tuple(frozenset(t) for t in transactions)

    def __len__(self):
        return len(self.transactions)

    def __iter__(self):
        return iter(self.transactions)

    @property
    def items(self):
        return sorted(set().union(*self.transactions)) if self.transactions else []


def load_transactions(path, db):
    transactions = []
    for lineno, line in _read_utf8_lines(path):
        ids = [tok for tok in line.split("\t") if tok.strip()]
        if not ids:
            continue
        for med_id in ids:
            if med_id not in db:
                raise UnknownId(lineno, med_id)
        transactions.append(frozenset(ids))
    return TransactionDb(transactions)


def read_wordlist(path):
    """Non-empty, NFC-normalized lines of a UTF-8 word list."""
    return [unicodedata.normalize("NFC", line.strip())
            for _, line in _read_utf8_lines(path) if line.strip()]
