"""Command-line entry point.

Exit codes: 0 success (recognize may still report unresolved words),
1 usage or configuration error, 2 I/O error, 3 data-format or pipeline error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import replace

from . import imaging
from .corpus import (
    Sample,
    _read_utf8_lines,
    load_medicine_db,
    load_transactions,
    read_wordlist,
    render_word,
    sample_seed,
    split_dataset,
)
from .errors import DataFormatError, ParseError, RxError
from .glyphs import default_atlas
from .lexicon import apriori, mine_rules, write_rules
from .netpbm import read_image, write_pgm
from .nnet import ModelConfig, init_model, save_model, train
from .pipeline import PipelineConfig, Recognizer, evaluate, load_page
from .uam import ValidUamDb

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_DATA = 0, 1, 2, 3

HISTORY_HEADER = ("epoch", "mean_ctc_loss", "test_seq_accuracy")


class UsageError(Exception):
    pass


def cmd_gen_corpus(cfg, lexicon_file, n_per_word, out_dir):
    """Render ``n_per_word`` samples per lexicon word as PGM files plus a manifest."""
    if n_per_word < 1:
        raise UsageError("--n-per-word must be >= 1")
    words = read_wordlist(lexicon_file)
    charset = cfg.load_charset()
    atlas = default_atlas()
    os.makedirs(os.path.join(out_dir, "images"), exist_ok=True)
    rows = []
    for i, word in enumerate(words):
        for k in range(n_per_word):
            s = render_word(word, charset, atlas, sample_seed(cfg.seed, i, k))
            rel = f"images/{len(rows):06d}.pgm"
            write_pgm(os.path.join(out_dir, rel), imaging.to_gray8(s.image))
            rows.append((rel, word, ",".join(str(j) for j in s.label)))
    with open(os.path.join(out_dir, "manifest.tsv"), "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write("\t".join(row) + "\n")
    charset.save(os.path.join(out_dir, "charset.txt"))
    return rows


def read_manifest(path):
    base = os.path.dirname(os.path.abspath(path))
    samples = []
    for lineno, line in _read_utf8_lines(path):
        if not line.strip():
            continue
        cols = line.split("\t")
        if len(cols) != 3:
            raise ParseError(lineno, "expected file<TAB>word<TAB>labels")
        try:
            label = tuple(int(x) for x in cols[2].split(","))
        except ValueError:
            raise ParseError(lineno, f"bad label list {cols[2]!r}") from None
        img = read_image(os.path.join(base, cols[0]))
        if img.ndim != 2:
            raise ParseError(lineno, "manifest images must be grayscale")
        samples.append(Sample(imaging.normalize(img), label, cols[1]))
    return samples


def write_history(path, history):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HISTORY_HEADER)
        for h in history:
            w.writerow([h.epoch, repr(h.mean_ctc_loss), repr(h.test_seq_accuracy)])


def cmd_train(cfg, manifest, model_path, history_path=None, progress=None):
    """Split the manifest, train from a seeded init, write weights and history."""
    samples = read_manifest(manifest)
    if not samples:
        raise DataFormatError(f"manifest {manifest} holds no samples")
    charset = cfg.load_charset()
    train_set, test_set = split_dataset(samples, cfg.train_fraction, cfg.seed)
    model = init_model(ModelConfig(charset.num_classes), cfg.seed)
    model, history = train(model, train_set, test_set, replace(cfg.train, seed=cfg.seed),
                           progress=progress)
    save_model(model, model_path)
    if history_path is None:
        history_path = os.path.splitext(model_path)[0] + ".history.csv"
    write_history(history_path, history)
    return model, history


def cmd_eval(cfg, manifest):
    samples = read_manifest(manifest)
    _, test_set = split_dataset(samples, cfg.train_fraction, cfg.seed)
    return evaluate(Recognizer.from_config(cfg), test_set)


def cmd_recognize(cfg, image_path, dump_dir=None):
    recognizer = Recognizer.from_config(cfg)
    return recognizer.recognize(load_page(image_path), dump_dir=dump_dir)


def cmd_db(cfg, subcommand, out=None):
    db = load_medicine_db(cfg.medicine_db)
    if subcommand == "validate":
        lines = [f"OK, {len(db)} entries"]
        if cfg.transactions:
            tx = load_transactions(cfg.transactions, db)
            lines.append(f"OK, {len(tx)} transactions")
        if cfg.uam_db:
            lines.append(f"OK, {len(ValidUamDb.load(cfg.uam_db))} UAM words")
        return "\n".join(lines)
    if subcommand == "mine-rules":
        tx = load_transactions(cfg.transactions, db)
        rules = mine_rules(apriori(tx, cfg.optimizer.min_support), cfg.optimizer.min_confidence)
        if out:
            write_rules(out, rules)
        return rules
    raise UsageError(f"unknown db subcommand {subcommand!r}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="JSON pipeline config")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--dump-stages", metavar="DIR", default=argparse.SUPPRESS,
                        help="write intermediate images (recognize)")

    p = _Parser(prog="rxread", description="Handwritten prescription recognition",
                parents=[common])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen-corpus", parents=[common], help="render a synthetic corpus")
    g.add_argument("lexicon")
    g.add_argument("--n-per-word", type=int, default=5)
    g.add_argument("--out", required=True)

    t = sub.add_parser("train", parents=[common], help="train a model from a manifest")
    t.add_argument("manifest")
    t.add_argument("--model", help="output weight file (defaults to config 'model')")
    t.add_argument("--history", help="per-epoch CSV path")
    t.add_argument("--epochs", type=int)
    t.add_argument("--learning-rate", type=float)
    t.add_argument("--batch-size", type=int)

    e = sub.add_parser("eval", parents=[common], help="score the test split")
    e.add_argument("manifest")
    e.add_argument("--model")
    e.add_argument("--out", help="write metrics JSON here instead of stdout")

    r = sub.add_parser("recognize", parents=[common], help="read a prescription image")
    r.add_argument("image")
    r.add_argument("--model")

    d = sub.add_parser("db", parents=[common], help="database maintenance")
    dsub = d.add_subparsers(dest="db_command", required=True, parser_class=_Parser)
    dsub.add_parser("validate", parents=[common])
    m = dsub.add_parser("mine-rules", parents=[common])
    m.add_argument("--out", help="rules TSV path")
    return p


def _config_from_args(args):
    cfg = PipelineConfig.load(args.config) if getattr(args, "config", None) else PipelineConfig()
    cfg = cfg.with_overrides(seed=getattr(args, "seed", None), model=getattr(args, "model", None))
    if args.command == "train":
        cfg = replace(cfg, train=replace(cfg.train, **{
            k: v for k, v in (("epochs", args.epochs), ("learning_rate", args.learning_rate),
                              ("batch_size", args.batch_size)) if v is not None}))
    return cfg


def _dump_json(obj, out=None):
    text = json.dumps(obj, ensure_ascii=False, indent=2) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _run(args):
    cfg = _config_from_args(args)
    if args.command == "gen-corpus":
        rows = cmd_gen_corpus(cfg, args.lexicon, args.n_per_word, args.out)
        print(f"wrote {len(rows)} samples to {args.out}")
    elif args.command == "train":
        if not cfg.model:
            raise UsageError("train needs --model or a config 'model' path")
        _, history = cmd_train(cfg, args.manifest, cfg.model, args.history,
                               progress=lambda h: print(
                                   f"epoch {h.epoch}: loss {h.mean_ctc_loss:.4f} "
                                   f"acc {h.test_seq_accuracy:.3f}", file=sys.stderr))
        print(f"wrote {cfg.model} ({len(history)} epochs)")
    elif args.command == "eval":
        _dump_json(cmd_eval(cfg, args.manifest), args.out)
    elif args.command == "recognize":
        _dump_json(cmd_recognize(cfg, args.image, getattr(args, "dump_stages", None)))
    elif args.command == "db":
        result = cmd_db(cfg, args.db_command, getattr(args, "out", None))
        if args.db_command == "validate":
            print(result)
        else:
            print(f"mined {len(result)} rules")
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except (UsageError, ValueError) as exc:
        # bad flags, malformed config JSON and out-of-range parameters
        print(f"rxread: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataFormatError, RxError) as exc:
        print(f"rxread: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"rxread: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
