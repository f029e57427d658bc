"""Connectionist temporal classification: loss, gradients and decoding.

Probability matrices have shape ``(T, C)``: one row per frame, one column per
class.  The blank is always the last class, ``C - 1``.  All path arithmetic
runs in log space; ``-inf`` is the log of zero.
"""

from __future__ import annotations

import math
import struct

import numpy as np

__all__ = [
    "collapse",
    "min_frames",
    "is_feasible",
    "ctc_posteriors",
    "ctc_loss",
    "greedy_decode",
    "LexiconTrie",
    "beam_decode",
    "write_logits",
    "read_logits",
    "encode_logits",
    "decode_logits",
]

NEG_INF = -np.inf


def collapse(path, blank):
    """Merge adjacent repeats, then drop blanks."""
    out = []
    prev = None
    for k in path:
        k = int(k)
        if k != prev and k != blank:
            out.append(k)
        prev = k
    return out


def min_frames(label):
    """Fewest frames that can emit ``label``: one per symbol plus a blank per repeat."""
    label = list(label)
    repeats = sum(1 for a, b in zip(label, label[1:]) if a == b)
    return len(label) + repeats


def is_feasible(label, frames):
    return min_frames(label) <= frames


def _extended(label, blank):
    ext = np.full(2 * len(label) + 1, blank, dtype=np.int64)
    ext[1::2] = label
    return ext


def ctc_posteriors(log_probs, label):
    """Forward-backward over the blank-interleaved label.

    Returns ``(loss, gamma)`` where ``loss = -ln P(label)`` and
    ``gamma[t, k]`` is the posterior probability that frame ``t`` emits class
    ``k`` given the label.  An infeasible label yields ``(inf, zeros)``.
    """
    log_probs = np.asarray(log_probs, dtype=np.float64)
    T, C = log_probs.shape
    blank = C - 1
    label = [int(k) for k in label]
    if any(k < 0 or k >= blank for k in label):
        raise ValueError("label indices must be non-blank classes")
    if not is_feasible(label, T):
        return math.inf, np.zeros((T, C))
    ext = _extended(label, blank)
    S = ext.size
    # transitions from s-2 are allowed onto a non-blank that differs from ext[s-2]
    skip = np.zeros(S, dtype=bool)
    skip[2:] = (ext[2:] != blank) & (ext[2:] != ext[:-2])

    emit = log_probs[:, ext]
    alpha = np.full((T, S), NEG_INF)
    alpha[0, 0] = emit[0, 0]
    if S > 1:
        alpha[0, 1] = emit[0, 1]
    for t in range(1, T):
        prev = alpha[t - 1]
        acc = prev.copy()
        acc[1:] = np.logaddexp(acc[1:], prev[:-1])
        acc[2:] = np.where(skip[2:], np.logaddexp(acc[2:], prev[:-2]), acc[2:])
        alpha[t] = acc + emit[t]

    # beta[t, s]: log prob of emitting frames t+1.. given state s at frame t
    beta = np.full((T, S), NEG_INF)
    beta[T - 1, S - 1] = 0.0
    if S > 1:
        beta[T - 1, S - 2] = 0.0
    for t in range(T - 2, -1, -1):
        nxt = beta[t + 1] + emit[t + 1]
        acc = nxt.copy()
        acc[:-1] = np.logaddexp(acc[:-1], nxt[1:])
        acc[:-2] = np.where(skip[2:], np.logaddexp(acc[:-2], nxt[2:]), acc[:-2])
        beta[t] = acc

    log_p = np.logaddexp(alpha[T - 1, S - 1], alpha[T - 1, S - 2]) if S > 1 else alpha[T - 1, 0]
    if not np.isfinite(log_p):
        return math.inf, np.zeros((T, C))
    occupancy = np.exp(alpha + beta - log_p)
    gamma = np.zeros((T, C))
    np.add.at(gamma.T, ext, occupancy.T)
    return float(-log_p), gamma


def ctc_loss(probs, label):
    """Negative log-likelihood of ``label`` and its gradient w.r.t. ``probs``.

    An infeasible label (too long for the frame count) returns an infinite
    loss with an all-zero gradient.
    """
    probs = np.asarray(probs, dtype=np.float64)
    with np.errstate(divide="ignore"):
        log_probs = np.log(probs)
    loss, gamma = ctc_posteriors(log_probs, label)
    if math.isinf(loss):
        return loss, gamma
    grad = np.zeros_like(probs)
    nz = gamma != 0
    grad[nz] = -gamma[nz] / probs[nz]
    return loss, grad


def greedy_decode(probs, charset):
    """Best-path decoding: collapse the per-frame argmax (lowest index wins ties)."""
    probs = np.asarray(probs)
    path = np.argmax(probs, axis=1)
    return charset.decode(collapse(path, probs.shape[1] - 1))


class LexiconTrie:
    """Prefix trie over charset index sequences.

    Words containing codepoints outside the charset cannot be emitted by the
    decoder and are skipped.
    """

    def __init__(self, words, charset):
        self._children = {(): set()}
        self._words = set()
        self.skipped = []
        for word in words:
            if not word or any(cp not in charset for cp in word):
                self.skipped.append(word)
                continue
            seq = tuple(charset.index(cp) for cp in word)
            for i in range(len(seq)):
                self._children.setdefault(seq[:i], set()).add(seq[i])
                self._children.setdefault(seq[:i + 1], set())
            self._words.add(seq)
        self._children = {k: tuple(sorted(v)) for k, v in self._children.items()}

    def __len__(self):
        return len(self._words)

    def children(self, prefix):
        return self._children.get(prefix, ())

    def has_prefix(self, prefix):
        return prefix in self._children

    def is_word(self, prefix):
        return prefix in self._words


def _top(beams, width):
    ranked = sorted(beams.items(), key=lambda kv: (-np.logaddexp(*kv[1]), kv[0]))
    return dict(ranked[:width])


def beam_decode(probs, charset, beam_width=10, lexicon=None):
    """Prefix beam search over collapsed label prefixes.

    Each hypothesis carries the log probability of its prefix ending in a
    blank and in a non-blank.  With a ``lexicon`` only trie prefixes are kept
    and only complete words are returned.  Results are ``(string, log_prob)``
    pairs sorted by descending probability, ties by prefix indices.
    """
    if beam_width < 1:
        raise ValueError("beam_width must be >= 1")
    probs = np.asarray(probs, dtype=np.float64)
    T, C = probs.shape
    if charset.num_classes != C:
        raise ValueError(f"charset has {charset.num_classes} classes, logits have {C}")
    blank = C - 1
    with np.errstate(divide="ignore"):
        lp = np.log(probs)
    symbols = tuple(range(blank))

    beams = {(): (0.0, NEG_INF)}  # prefix -> (log p ending blank, log p ending non-blank)
    for t in range(T):
        row = lp[t].tolist()
        nxt = {}

        def add(prefix, pb=NEG_INF, pnb=NEG_INF):
            ob, onb = nxt.get(prefix, (NEG_INF, NEG_INF))
            nxt[prefix] = (np.logaddexp(ob, pb), np.logaddexp(onb, pnb))

        for prefix, (pb, pnb) in beams.items():
            total = np.logaddexp(pb, pnb)
            add(prefix, pb=total + row[blank])
            last = prefix[-1] if prefix else None
            if last is not None:
                add(prefix, pnb=pnb + row[last])
            candidates = lexicon.children(prefix) if lexicon is not None else symbols
            for c in candidates:
                if row[c] == NEG_INF:
                    continue
                ext = prefix + (c,)
                add(ext, pnb=(pb if c == last else total) + row[c])
        beams = _top(nxt, beam_width)

    results = []
    for prefix, (pb, pnb) in beams.items():
        if lexicon is not None and not lexicon.is_word(prefix):
            continue
        results.append((prefix, float(np.logaddexp(pb, pnb))))
    results.sort(key=lambda r: (-r[1], r[0]))
    return [(charset.decode(p), score) for p, score in results if score > NEG_INF]


_LOGITS_HEADER = struct.Struct("<II")


def encode_logits(probs):
    probs = np.asarray(probs, dtype="<f8")
    if probs.ndim != 2:
        raise ValueError("logits must be a (T, C) matrix")
    T, C = probs.shape
    return _LOGITS_HEADER.pack(T, C) + np.ascontiguousarray(probs).tobytes()


def decode_logits(data):
    if len(data) < _LOGITS_HEADER.size:
        raise ValueError("logits block shorter than its header")
    T, C = _LOGITS_HEADER.unpack_from(data)
    body = data[_LOGITS_HEADER.size:]
    if len(body) != T * C * 8:
        raise ValueError(f"logits block holds {len(body)} bytes, expected {T * C * 8}")
    return np.frombuffer(body, dtype="<f8").reshape(T, C).astype(np.float64)


def write_logits(path, probs):
    with open(path, "wb") as fh:
        fh.write(encode_logits(probs))


def read_logits(path):
    with open(path, "rb") as fh:
        return decode_logits(fh.read())
