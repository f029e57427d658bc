"""
From page pixels to word crops
==============================

Render a synthetic prescription line, then walk it through every
preprocessing stage the recognizer uses.  Stage images are written as
PGM files next to this script so they can be opened in any viewer.
"""

import os

import numpy as np

from rxread import imaging
from rxread.corpus import render_page
from rxread.glyphs import default_atlas
from rxread.netpbm import write_pgm

OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "out_preprocessing")
os.makedirs(OUT, exist_ok=True)

# A page is built from lines of words; the renderer also hands back the
# ground-truth ink boxes so we can compare them with segmentation later.
page, true_boxes = render_page([["paracetamol", "500"], ["cetirizine"]], default_atlas(), seed=3)
print("page shape", page.shape, "ink fraction", round(float((page < 0.6).mean()), 3))
write_pgm(os.path.join(OUT, "0_page.pgm"), imaging.to_gray8(page))

# Smoothing is a box filter; radius 1 averages each 3x3 neighbourhood.
smoothed = imaging.smooth(page, radius=1)
write_pgm(os.path.join(OUT, "1_smoothed.pgm"), imaging.to_gray8(smoothed))

# Sobel edges are only a diagnostic view.  The network never sees them.
edges = imaging.detect_edges(smoothed, threshold=0.5)
print("edge pixels", int(edges.binary.sum()))
write_pgm(os.path.join(OUT, "2_edges.pgm"), imaging.to_gray8(1.0 - edges.binary.astype(float)))

# Projection profiles split the page into lines, then lines into words.
segments = imaging.segment_words(smoothed, ink_threshold=0.6, min_gap=8)
for seg, truth in zip(segments, true_boxes):
    print("segment", seg.box, "truth", truth)

# Each word is cropped to its ink and resized to the network input, 32 x 128.
for k, seg in enumerate(segments):
    crop = imaging.standardize(seg.image)
    assert crop.shape == (32, 128) and np.all((crop >= 0) & (crop <= 1))
    write_pgm(os.path.join(OUT, f"3_word{k}.pgm"), imaging.to_gray8(crop))

# Augmentation is how the corpus generator adds variety: a small rotation
# and shear keep the word legible while moving every pixel.
spec = imaging.AugmentSpec(rotate_deg=4.0, shear_x=0.15)
warped = imaging.augment(imaging.standardize(segments[0].image), spec)
write_pgm(os.path.join(OUT, "4_augmented.pgm"), imaging.to_gray8(warped))
print("stage images in", OUT)
