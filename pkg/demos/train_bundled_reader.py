"""Rebuild the bundled reader model, ``rxread/data/reader.rxw``.

The reader is a general-purpose word recognizer: it sees every English
medicine name a few times plus a large set of random Latin strings, so it
learns individual letters rather than memorizing the lexicon.  The run is
fully seeded; rerunning it reproduces the shipped file byte for byte.

    python3 demos/train_bundled_reader.py [--out PATH] [--epochs N]

Takes roughly ten minutes on one CPU core.
"""

import argparse
import string
import sys
import time

from rxread.corpus import default_charset, load_medicine_db, random_words, render_corpus
from rxread.glyphs import default_atlas
from rxread.nnet import ModelConfig, TrainConfig, init_model, save_model, train
from rxread.pipeline import DATA_DIR

SEED = 2024
LATIN = string.ascii_lowercase + string.digits + "-"


def build_corpus(charset, atlas):
    db = load_medicine_db(DATA_DIR / "medicines.tsv")
    names = [e.name for e in db if e.lang == "en"]
    randoms = random_words(1500, LATIN, 3, 16, SEED)
    return (render_corpus(names, charset, atlas, SEED, renders_per_word=3)
            + render_corpus(randoms, charset, atlas, SEED + 1))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(DATA_DIR / "reader.rxw"))
    ap.add_argument("--epochs", type=int, default=30)
    args = ap.parse_args(argv)

    charset = default_charset()
    samples = build_corpus(charset, default_atlas())
    print(f"{len(samples)} training samples", flush=True)
    model = init_model(ModelConfig(charset.num_classes), SEED)
    cfg = TrainConfig(epochs=args.epochs, learning_rate=3e-3, batch_size=16, seed=SEED)
    t0 = time.time()
    model, _ = train(model, samples, samples[:200], cfg, progress=lambda h: print(
        f"epoch {h.epoch:2d}  loss {h.mean_ctc_loss:8.4f}  fit {h.test_seq_accuracy:.3f}"
        f"  {time.time() - t0:5.0f}s", flush=True))
    save_model(model, args.out)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    sys.exit(main())
