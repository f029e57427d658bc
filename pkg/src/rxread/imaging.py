"""Image preprocessing: grayscale, normalization, smoothing, edges, word
segmentation, standardization and augmentation.

Images are plain numpy arrays, indexed ``[row, col]``:

* raster (color) images are ``uint8`` arrays of shape ``(H, W, 3)``
* gray images are ``uint8`` arrays of shape ``(H, W)``
* normalized images are ``float64`` arrays of shape ``(H, W)`` in ``[0, 1]``

Ink is dark on a light background, so the background value of a normalized
image is 1.0.  Every function here is pure and leaves its input untouched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CropTooLarge, ImageTooSmall

__all__ = [
    "LUMA_WEIGHTS",
    "BACKGROUND",
    "EdgeMap",
    "WordSegment",
    "AugmentSpec",
    "to_grayscale",
    "normalize",
    "to_gray8",
    "smooth",
    "detect_edges",
    "ink_bbox",
    "segment_words",
    "resize_bilinear",
    "standardize",
    "augment",
]

LUMA_WEIGHTS = (0.299, 0.587, 0.114)
BACKGROUND = 1.0

SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
SOBEL_Y = SOBEL_X.T.copy()


@dataclass(frozen=True)
class EdgeMap:
    magnitude: np.ndarray
    binary: np.ndarray
    threshold: float

    @property
    def height(self):
        return self.magnitude.shape[0]

    @property
    def width(self):
        return self.magnitude.shape[1]


@dataclass(frozen=True)
class WordSegment:
    """A word crop with its bounding box in page coordinates.

    The box is inclusive at ``(x0, y0)`` and exclusive at ``(x1, y1)``.
    """

    x0: int
    y0: int
    x1: int
    y1: int
    image: np.ndarray

    @property
    def box(self):
        return (self.x0, self.y0, self.x1, self.y1)


@dataclass(frozen=True)
class AugmentSpec:
    rotate_deg: float = 0.0
    shear_x: float = 0.0
    crop_margin: int = 0
    flip_h: bool = False
    flip_v: bool = False
    seed: int = 0

    @property
    def is_identity(self):
        return (self.rotate_deg == 0 and self.shear_x == 0 and self.crop_margin == 0
                and not self.flip_h and not self.flip_v)


def _check_2d(img):
    img = np.asarray(img)
    if img.ndim != 2 or img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D image, got shape {img.shape}")
    return img


def to_grayscale(img):
    """BT.601 luma of an RGB image, rounded half-up to ``uint8``."""
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) raster, got shape {img.shape}")
    rgb = img.astype(np.float64)
    luma = rgb[..., 0] * LUMA_WEIGHTS[0] + rgb[..., 1] * LUMA_WEIGHTS[1] + rgb[..., 2] * LUMA_WEIGHTS[2]
    return np.clip(np.floor(luma + 0.5), 0, 255).astype(np.uint8)


def normalize(img):
    """Map 0..255 intensities onto [0, 1] by dividing by 255."""
    img = _check_2d(img)
    return img.astype(np.float64) / 255.0


def to_gray8(img):
    """Inverse of :func:`normalize`, rounding to the nearest level."""
    img = _check_2d(img)
    return np.clip(np.floor(img * 255.0 + 0.5), 0, 255).astype(np.uint8)


def smooth(img, radius=1):
    """Box filter of side ``2*radius + 1`` with edge-clamped borders."""
    img = _check_2d(img).astype(np.float64)
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if radius == 0:
        return img.copy()
    side = 2 * radius + 1
    h, w = img.shape
    padded = np.pad(img, radius, mode="edge")
    rows = np.zeros((h + 2 * radius, w))
    for dx in range(side):
        rows += padded[:, dx:dx + w]
    out = np.zeros((h, w))
    for dy in range(side):
        out += rows[dy:dy + h, :]
    out /= side * side
    return np.clip(out, 0.0, 1.0)


def detect_edges(img, threshold=0.5):
    """Sobel gradient magnitude on interior pixels.

    Border pixels have no full 3x3 neighbourhood; their magnitude is 0 and they
    are never marked as edges.
    """
    img = _check_2d(img).astype(np.float64)
    h, w = img.shape
    if h < 3 or w < 3:
        raise ImageTooSmall(w, h)
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    def win(dy, dx):
        return img[dy:dy + h - 2, dx:dx + w - 2]

    # difference of the two weighted side sums, so flat regions give exactly 0
    gx = (win(0, 2) + 2 * win(1, 2) + win(2, 2)) - (win(0, 0) + 2 * win(1, 0) + win(2, 0))
    gy = (win(2, 0) + 2 * win(2, 1) + win(2, 2)) - (win(0, 0) + 2 * win(0, 1) + win(0, 2))
    magnitude = np.zeros((h, w))
    magnitude[1:-1, 1:-1] = np.hypot(gx, gy)
    binary = np.zeros((h, w), dtype=bool)
    binary[1:-1, 1:-1] = magnitude[1:-1, 1:-1] >= threshold
    return EdgeMap(magnitude=magnitude, binary=binary, threshold=float(threshold))


def _runs(mask):
    """(start, stop) pairs of the maximal True runs in a 1-D boolean mask."""
    mask = np.asarray(mask, dtype=np.int8)
    edges = np.diff(np.concatenate(([0], mask, [0])))
    starts = np.flatnonzero(edges == 1)
    stops = np.flatnonzero(edges == -1)
    return list(zip(starts.tolist(), stops.tolist()))


def _merge_runs(runs, min_gap):
    """Join consecutive runs separated by fewer than ``min_gap`` positions."""
    merged = []
    for a, b in runs:
        if merged and a - merged[-1][1] < min_gap:
            merged[-1][1] = b
        else:
            merged.append([a, b])
    return merged


def ink_bbox(img, ink_threshold=0.6):
    """Tight (x0, y0, x1, y1) box around pixels darker than the threshold, or None."""
    ink = _check_2d(img) < ink_threshold
    rows = np.flatnonzero(ink.any(axis=1))
    if rows.size == 0:
        return None
    cols = np.flatnonzero(ink.any(axis=0))
    return int(cols[0]), int(rows[0]), int(cols[-1]) + 1, int(rows[-1]) + 1


def segment_words(img, ink_threshold=0.6, min_gap=8):
    """Split a page into word crops using projection profiles.

    Text lines are bands of rows containing ink; bands closer than
    ``min_gap`` blank rows are merged so detached marks (the dot of an "i")
    stay with their line.  Inside a line, a run of at least ``min_gap``
    ink-free columns separates two words.  Each segment's box is the tight
    bounding box of its own ink.
    """
    img = _check_2d(img)
    if not 0 < ink_threshold < 1:
        raise ValueError("ink_threshold must lie in (0, 1)")
    if min_gap < 1:
        raise ValueError("min_gap must be >= 1")
    ink = img < ink_threshold
    segments = []
    for y0, y1 in _merge_runs(_runs(ink.any(axis=1)), min_gap):
        band = ink[y0:y1]
        for c0, c1 in _merge_runs(_runs(band.any(axis=0)), min_gap):
            rows = np.flatnonzero(band[:, c0:c1].any(axis=1))
            sy0, sy1 = y0 + int(rows[0]), y0 + int(rows[-1]) + 1
            segments.append(WordSegment(c0, sy0, c1, sy1, img[sy0:sy1, c0:c1].copy()))
    return segments


def resize_bilinear(img, out_h, out_w):
    """Bilinear resampling with pixel-centre alignment and clamped edges."""
    img = _check_2d(img).astype(np.float64)
    h, w = img.shape
    if (h, w) == (out_h, out_w):
        return img.copy()

    def axis(n_in, n_out):
        src = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
        src = np.clip(src, 0, n_in - 1)
        lo = np.floor(src).astype(int)
        hi = np.minimum(lo + 1, n_in - 1)
        return lo, hi, src - lo

    r0, r1, fr = axis(h, out_h)
    c0, c1, fc = axis(w, out_w)
    top = img[r0][:, c0] * (1 - fc) + img[r0][:, c1] * fc
    bottom = img[r1][:, c0] * (1 - fc) + img[r1][:, c1] * fc
    return top * (1 - fr[:, None]) + bottom * fr[:, None]


def standardize(seg, out_h=32, out_w=128):
    """Fit a crop into ``out_h x out_w`` without distorting its aspect ratio.

    The scaled content sits in the top-left corner; the remaining right and
    bottom area is filled with the background value.
    """
    seg = _check_2d(seg)
    if out_h < 1 or out_w < 1:
        raise ValueError("output size must be positive")
    h, w = seg.shape
    scale = min(out_h / h, out_w / w)
    new_h = min(out_h, max(1, round(h * scale)))
    new_w = min(out_w, max(1, round(w * scale)))
    out = np.full((out_h, out_w), BACKGROUND)
    out[:new_h, :new_w] = np.clip(resize_bilinear(seg, new_h, new_w), 0.0, 1.0)
    return out


def _sample(img, src_x, src_y):
    """Bilinear lookup at fractional source coordinates, background outside."""
    h, w = img.shape
    padded = np.pad(img, 1, constant_values=BACKGROUND)
    # snap coordinates that are integral up to rounding noise
    src_x = np.where(np.abs(src_x - np.rint(src_x)) < 1e-9, np.rint(src_x), src_x)
    src_y = np.where(np.abs(src_y - np.rint(src_y)) < 1e-9, np.rint(src_y), src_y)
    inside = (src_x > -1) & (src_x < w) & (src_y > -1) & (src_y < h)
    x = np.clip(src_x, -1, w) + 1
    y = np.clip(src_y, -1, h) + 1
    x0 = np.clip(np.floor(x).astype(int), 0, w)
    y0 = np.clip(np.floor(y).astype(int), 0, h)
    fx = x - x0
    fy = y - y0
    x1 = np.minimum(x0 + 1, w + 1)
    y1 = np.minimum(y0 + 1, h + 1)
    val = (padded[y0, x0] * (1 - fx) * (1 - fy) + padded[y0, x1] * fx * (1 - fy)
           + padded[y1, x0] * (1 - fx) * fy + padded[y1, x1] * fx * fy)
    return np.where(inside, val, BACKGROUND)


def augment(img, spec):
    """Apply crop, rotation about the centre, horizontal shear, then flips.

    The crop removes ``crop_margin`` pixels from every side and rescales the
    remainder back to the input size.  Positive ``rotate_deg`` turns the
    content counter-clockwise as displayed (rows grow downward).  Shear maps a
    source point ``(x, y)`` to ``(x + shear_x * (y - cy), y)``.
    """
    img = _check_2d(img).astype(np.float64)
    h, w = img.shape
    if spec.is_identity:
        return img.copy()
    if spec.crop_margin < 0 or (spec.crop_margin and spec.crop_margin >= min(w, h) / 4):
        raise CropTooLarge(spec.crop_margin, w, h)
    out = img
    m = spec.crop_margin
    if m:
        out = resize_bilinear(out[m:h - m, m:w - m], h, w)
    if spec.rotate_deg or spec.shear_x:
        cy, cx = (h - 1) / 2, (w - 1) / 2
        ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
        dx, dy = xs - cx, ys - cy
        if spec.shear_x:
            dx = dx - spec.shear_x * dy
        if spec.rotate_deg:
            theta = math.radians(spec.rotate_deg)
            cos, sin = math.cos(theta), math.sin(theta)
            # inverse of a counter-clockwise turn in a y-down frame
            dx, dy = cos * dx - sin * dy, sin * dx + cos * dy
        out = np.clip(_sample(out, dx + cx, dy + cy), 0.0, 1.0)
    if spec.flip_h:
        out = out[:, ::-1]
    if spec.flip_v:
        out = out[::-1, :]
    return np.ascontiguousarray(out)
