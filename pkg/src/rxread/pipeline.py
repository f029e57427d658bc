"""End-to-end recognition: page image in, structured medicine list out."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import ctc, imaging, uam
from .corpus import Charset, default_charset, fold, load_medicine_db, load_transactions
from .errors import NoCandidate, RxError
from .lexicon import OptimizerConfig, apriori, build_index, mine_rules, optimize_prediction
from .netpbm import read_image, write_pgm
from .nnet import TrainConfig, forward, load_model

DATA_DIR = Path(__file__).resolve().parent / "data"

__all__ = ["DATA_DIR", "PipelineConfig", "Recognizer", "load_page", "evaluate"]


@dataclass(frozen=True)
class PipelineConfig:
    model: str | None = str(DATA_DIR / "reader.rxw")
    charset: str | None = None
    medicine_db: str = str(DATA_DIR / "medicines.tsv")
    transactions: str = str(DATA_DIR / "transactions.tsv")
    uam_db: str = str(DATA_DIR / "uam_words.tsv")
    ink_threshold: float = 0.6
    min_gap: int = 8
    smooth_radius: int = 1
    edge_threshold: float = 0.5
    beam_width: int = 10
    use_lexicon: bool = False
    seed: int = 0
    train_fraction: float = 0.9
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    train: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        if not 0 < self.ink_threshold < 1:
            raise ValueError("ink_threshold must lie in (0, 1)")
        if self.min_gap < 1 or self.smooth_radius < 0 or self.beam_width < 1:
            raise ValueError("min_gap and beam_width must be >= 1, smooth_radius >= 0")

    @classmethod
    def from_dict(cls, data, base_dir=None):
        """Build a config from parsed JSON; relative paths resolve against ``base_dir``."""
        data = dict(data)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "optimizer" in data:
            data["optimizer"] = OptimizerConfig(**data["optimizer"])
        if "train" in data:
            data["train"] = TrainConfig(**data["train"])
        if base_dir is not None:
            for key in ("model", "charset", "medicine_db", "transactions", "uam_db"):
                if data.get(key):
                    data[key] = os.path.join(base_dir, data[key])
        return cls(**data)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh), base_dir=os.path.dirname(os.path.abspath(path)))

    def to_dict(self):
        return asdict(self)

    def with_overrides(self, **kw):
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def load_charset(self):
        return Charset.load(self.charset) if self.charset else default_charset()


def load_page(path):
    """Read a PGM/PPM/PNG file as a normalized gray page."""
    img = read_image(path)
    if img.ndim == 3:
        img = imaging.to_grayscale(img)
    return imaging.normalize(img)


class Recognizer:
    """A loaded model, charset and databases, ready to read pages."""

    def __init__(self, model, charset, db, uam_db, rules, cfg):
        if model.config.num_classes != charset.num_classes:
            raise ValueError("model and charset disagree on the number of classes")
        self.model = model
        self.charset = charset
        self.db = db
        self.uam_db = uam_db
        self.rules = rules
        self.cfg = cfg
        self.index = build_index(db)
        self.trie = ctc.LexiconTrie(sorted({fold(e.name) for e in db}), charset)

    @classmethod
    def from_config(cls, cfg, model=None):
        charset = cfg.load_charset()
        if model is None:
            if not cfg.model:
                raise ValueError("config names no model file")
            model = load_model(cfg.model, charset.num_classes)
        db = load_medicine_db(cfg.medicine_db)
        rules = []
        if cfg.transactions:
            tx = load_transactions(cfg.transactions, db)
            if len(tx):
                itemsets = apriori(tx, cfg.optimizer.min_support)
                rules = mine_rules(itemsets, cfg.optimizer.min_confidence)
        uam_db = uam.ValidUamDb.load(cfg.uam_db) if cfg.uam_db else uam.ValidUamDb()
        # medicine names are always legitimate strings
        for e in db:
            uam_db.add(e.lang, e.name)
        return cls(model, charset, db, uam_db, rules, cfg)

    def read_word(self, image):
        """Decode one standardized word image; empty string when nothing decodes."""
        probs = forward(self.model, image)
        lexicon = self.trie if self.cfg.use_lexicon else None
        hyps = ctc.beam_decode(probs, self.charset, self.cfg.beam_width, lexicon)
        return hyps[0][0] if hyps else ""

    def correct(self, raw, context=()):
        """UAM validation/repair followed by database re-ranking.

        Returns ``(uam_string or None, candidates)``; candidates are empty
        when nothing in the database is within range.
        """
        if not raw:
            return None, []
        u = uam.map_segments(list(raw))
        u = uam.repair(uam.classify(u, self.uam_db), self.uam_db, self.cfg.optimizer.max_dist)
        try:
            cands = optimize_prediction(u.text, context, self.index, self.rules, self.cfg.optimizer)
        except NoCandidate:
            cands = []
        return u, cands

    def recognize(self, page, dump_dir=None):
        """Segment a normalized page and resolve every word against the database."""
        page = np.asarray(page, dtype=np.float64)
        cfg = self.cfg
        smoothed = imaging.smooth(page, cfg.smooth_radius)
        segments = imaging.segment_words(smoothed, cfg.ink_threshold, cfg.min_gap)
        if dump_dir is not None:
            self._dump(dump_dir, page, smoothed)

        results = []
        for i, seg in enumerate(segments):
            entry = {"index": i, "box": list(seg.box), "raw": "", "uam": None,
                     "candidates": [], "pick": None, "unresolved": True, "error": None}
            try:
                std = imaging.standardize(seg.image, self.model.config.input_h,
                                          self.model.config.input_w)
                if dump_dir is not None:
                    write_pgm(os.path.join(dump_dir, f"segment_{i:03d}.pgm"), imaging.to_gray8(std))
                entry["raw"] = self.read_word(std)
            except RxError as exc:
                entry["error"] = f"recognize: {exc}"
            results.append(entry)

        # first pass without context, then re-rank with the other words' picks
        for _ in range(2):
            picks = [r["pick"]["id"] if r["pick"] else None for r in results]
            for i, entry in enumerate(results):
                if entry["error"]:
                    continue
                context = {p for j, p in enumerate(picks) if j != i and p}
                try:
                    u, cands = self.correct(entry["raw"], context)
                except RxError as exc:
                    entry["error"] = f"correct: {exc}"
                    continue
                entry["uam"] = u.to_dict() if u else None
                entry["candidates"] = [
                    {"id": c.entry.id, "name": c.entry.name, "distance": c.distance,
                     "score": c.score} for c in cands]
                if cands:
                    e = cands[0].entry
                    entry["pick"] = {"id": e.id, "name": e.name, "lang": e.lang,
                                     "description": e.description}
                    entry["unresolved"] = False
                else:
                    entry["pick"] = None
                    entry["unresolved"] = True
        return {"segments": results}

    def _dump(self, dump_dir, page, smoothed):
        os.makedirs(dump_dir, exist_ok=True)
        write_pgm(os.path.join(dump_dir, "normalized.pgm"), imaging.to_gray8(page))
        write_pgm(os.path.join(dump_dir, "smoothed.pgm"), imaging.to_gray8(smoothed))
        if min(smoothed.shape) >= 3:
            edges = imaging.detect_edges(smoothed, self.cfg.edge_threshold)
            peak = edges.magnitude.max()
            mag = edges.magnitude / peak if peak > 0 else edges.magnitude
            write_pgm(os.path.join(dump_dir, "edges.pgm"), imaging.to_gray8(1.0 - mag))
            write_pgm(os.path.join(dump_dir, "edges_binary.pgm"),
                      np.where(edges.binary, 0, 255).astype(np.uint8))


def evaluate(recognizer, samples):
    """Decode samples and score them before and after database correction."""
    from .lexicon import levenshtein

    n = len(samples)
    pre_hits = post_hits = 0
    pre_dist = post_dist = 0
    confusion = {}
    for s in samples:
        raw = recognizer.read_word(s.image)
        _, cands = recognizer.correct(raw)
        final = cands[0].entry.name if cands else raw
        truth = s.source_word
        pre_hits += fold(raw) == fold(truth)
        post_hits += fold(final) == fold(truth)
        pre_dist += levenshtein(fold(raw), fold(truth))
        post_dist += levenshtein(fold(final), fold(truth))
        row = confusion.setdefault(truth, {})
        row[raw] = row.get(raw, 0) + 1
    return {
        "n": n,
        "sequence_accuracy": pre_hits / n if n else None,
        "post_correction_accuracy": post_hits / n if n else None,
        "mean_edit_distance": pre_dist / n if n else None,
        "post_mean_edit_distance": post_dist / n if n else None,
        "confusion": {w: dict(sorted(c.items())) for w, c in sorted(confusion.items())},
    }
