"""Embedded bitmap glyphs used to synthesize word images.

Each glyph is a 9-row bitmap; ``#`` marks ink.  Latin letters and digits come
from a 6-pixel-wide bitmap font; a small Devanagari set exercises non-Latin
codepoints, including combining vowel signs drawn in codepoint order.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import UnknownGlyph

GLYPH_ROWS = 9

_GLYPHS = {
    "a": "....../....../.###../##.##./.####./##.##./######/....../......",
    "b": "##..../##..../####../##.##./##.##./##.##./####../....../......",
    "c": "....../....../.###../##.##./##..../##.##./.###../....../......",
    "d": "..###./...##./.####./##.##./##.##./##.##./.#####/....../......",
    "e": "....../....../.###../##.##./#####./##..../.####./....../......",
    "f": "..###./.##.../#####./.##.../.##.../.##.../#####./....../......",
    "g": "....../....../.##.##/##.##./##.##./##.##./.####./...##./####..",
    "h": "##..../##..../####../##.##./##.##./##.##./##.##./....../......",
    "i": "..##../....../####../..##../..##../..##../######/....../......",
    "j": "..##../....../####../..##../..##../..##../..##../..##../###...",
    "k": "##..../##..../##.##./####../###.../####../##.###/....../......",
    "l": "####../..##../..##../..##../..##../..##../######/....../......",
    "m": "....../....../####../#####./#.#.#./#.#.#./#.#.#./....../......",
    "n": "....../....../#.##../##.##./##.##./##.##./##.##./....../......",
    "o": "....../....../.###../##.##./##.##./##.##./.###../....../......",
    "p": "....../....../####../##.##./##.##./##.##./####../##..../###...",
    "q": "....../....../.##.##/##.##./##.##./##.##./.####./...##./..####",
    "r": "....../....../##.###/.###.#/.##.../.##.../####../....../......",
    "s": "....../....../.####./###.../.####./...###/#####./....../......",
    "t": ".##.../.##.../#####./.##.../.##.../.##.##/..###./....../......",
    "u": "....../....../##.##./##.##./##.##./##.##./.#####/....../......",
    "v": "....../....../##.##./##.##./.###../.###../..#.../....../......",
    "w": "....../....../#.#.##/#.#.#./#####./.####./.#.#../....../......",
    "x": "....../....../###.##/.####./..##../.####./##.###/....../......",
    "y": "....../....../##.###/##.##./##.##./.#.#../.###../.##.../##....",
    "z": "....../....../#####./#.##../.##.../##.##./#####./....../......",
    "A": "....../####../.###../.#.#../#####./##.##./##.###/....../......",
    "B": "....../####../##.##./####../##.##./##.##./####../....../......",
    "C": "....../.####./##.##./##..../##..../##.##./.###../....../......",
    "D": "....../####../##.##./##.##./##.##./##.##./####../....../......",
    "E": "....../#####./##..../####../##..../##.##./#####./....../......",
    "F": "....../#####./##..../####../##..../##..../###.../....../......",
    "G": "....../.###../##.##./##..../#####./##.##./.####./....../......",
    "H": "....../##.###/##.##./#####./##.##./##.##./##.###/....../......",
    "I": "....../####../.##.../.##.../.##.../.##.../####../....../......",
    "J": "....../.####./..##../..##../#.##../#.##../###.../....../......",
    "K": "....../##.##./##.#../###.../####../##.##./###.##/....../......",
    "L": "....../###.../##..../##..../##..../##.##./#####./....../......",
    "M": "....../#...#./##.##./##.##./#####./#.#.#./#.#.#./....../......",
    "N": "....../##.###/###.#./###.#./##.##./##.##./##..#./....../......",
    "O": "....../.###../##.##./##.##./##.##./##.##./.###../....../......",
    "P": "....../####../##.##./##.##./####../##..../###.../....../......",
    "Q": "....../.###../##.##./##.##./##.##./##.##./.###../...##./......",
    "R": "....../####../##.##./##.##./####../##.##./###.##/....../......",
    "S": "....../.####./##..#./####../..###./#..##./####../....../......",
    "T": "....../#####./.##.#./.##.../.##.../.##.../####../....../......",
    "U": "....../##.###/##.##./##.##./##.##./##.##./.###../....../......",
    "V": "....../##.###/##.##./.#.#../.###../.###../..#.../....../......",
    "W": "....../#.#.##/#.#.#./#.#.#./#####./.###../.#.#../....../......",
    "X": "....../##..##/.####./..##../..##../.####./##..##/....../......",
    "Y": "....../##..##/##..##/.####./..##../..##../.####./....../......",
    "Z": "....../#####./##.##./..##../.##.../##.##./#####./....../......",
    "0": ".###../##.##./##.##./##.##./##.##./##.##./.###../....../......",
    "1": "..##../####../..##../..##../..##../..##../######/....../......",
    "2": ".###../##.##./...##./..##../.##.../##.##./#####./....../......",
    "3": ".###../##.##./...##./.###../...##./##.##./.###../....../......",
    "4": "...##./..###./.#.##./##.##./######/...##./...##./....../......",
    "5": "#####./##..../####../##.##./...##./#..##./####../....../......",
    "6": ".###../##.##./##..../####../##.##./##.##./.###../....../......",
    "7": "#####./##.##./...##./..##../..##../.##.../.##.../....../......",
    "8": ".###../##.##./##.##./.###../##.##./##.##./.###../....../......",
    "9": ".###../##.##./##.##./.####./...##./##.##./.###../....../......",
    "-": "....../....../....../#####./....../....../....../....../......",
    # Devanagari demonstration subset (hand-drawn, row 1 is the headline)
    "\u0915": "....../######/..#.../.####./#.#..#/.####./..#.../..#.../......",  # ka
    "\u091f": "....../######/..#.../.#..../.#..#./..##../....../....../......",  # tta
    "\u0921": "....../######/..#.../..#.../.#.##./.#..#./..##../....../......",  # dda
    "\u0928": "....../######/...#../##.#../..##../...#../...#../....../......",  # na
    "\u092a": "....../######/#...#./#...#./.####./....#./....#./....../......",  # pa
    "\u092e": "....../######/#.#.#./#.#.#./.##.#./....#./....#./....../......",  # ma
    "\u0930": "....../#####./..#.../...#../..#.../.#..../..##../....../......",  # ra
    "\u0932": "....../######/..#.#./.#..#./.####./..#.#./....#./....../......",  # la
    "\u0938": "....../######/#..##./#.#.#./.####./....#./....#./....../......",  # sa
    "\u093e": ".../###/.#./.#./.#./.#./.#./.../...",  # sign aa
    "\u093f": ".##/#../###/#../#../#../#../.../...",  # sign i
    "\u0940": "##./..#/###/..#/..#/..#/..#/.../...",  # sign ii
    "\u0947": "#../.#./###/.../.../.../.../.../...",  # sign e
    "\u094b": "#../.##/###/.#./.#./.#./.#./.../...",  # sign o
}


class GlyphAtlas:
    """Codepoint to bitmap lookup.

    Bitmaps are boolean arrays of shape ``(GLYPH_ROWS, width)`` with empty
    leading and trailing columns trimmed, so glyph widths vary.
    """

    def __init__(self, glyphs):
        self._bitmaps = {}
        for ch, bitmap in glyphs.items():
            bitmap = np.asarray(bitmap, dtype=bool)
            if bitmap.ndim != 2 or bitmap.shape[0] != GLYPH_ROWS:
                raise ValueError(f"glyph {ch!r} must have {GLYPH_ROWS} rows")
            cols = np.flatnonzero(bitmap.any(axis=0))
            if cols.size:
                bitmap = bitmap[:, cols[0]:cols[-1] + 1]
            bitmap.setflags(write=False)
            self._bitmaps[ch] = bitmap

    @classmethod
    def from_strings(cls, table):
        return cls({ch: [[c == "#" for c in row] for row in art.split("/")]
                    for ch, art in table.items()})

    def __contains__(self, ch):
        return ch in self._bitmaps

    def __len__(self):
        return len(self._bitmaps)

    def __getitem__(self, ch):
        try:
            return self._bitmaps[ch]
        except KeyError:
            raise UnknownGlyph(ch) from None

    @property
    def codepoints(self):
        return list(self._bitmaps)

    def missing(self, word):
        """Codepoints of ``word`` that have no glyph, in order of appearance."""
        return [ch for ch in dict.fromkeys(word) if ch not in self._bitmaps]


@lru_cache(maxsize=None)
def default_atlas():
    return GlyphAtlas.from_strings(_GLYPHS)
