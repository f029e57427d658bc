import math

import numpy as np
import pytest

from oracles import ctc_brute_distribution, ctc_brute_prob
from rxread import ctc
from rxread.corpus import Charset


def random_probs(rng, T, C, sharp=1.0):
    z = rng.normal(size=(T, C)) * sharp
    p = np.exp(z - z.max(axis=1, keepdims=True))
    return p / p.sum(axis=1, keepdims=True)


def test_collapse_merges_repeats_then_drops_blanks():
    assert ctc.collapse([0, 0, 2, 0, 1, 1, 2], blank=2) == [0, 0, 1]
    assert ctc.collapse([2, 2, 2], blank=2) == []


@pytest.mark.parametrize("label,frames", [([], 0), ([0], 1), ([0, 0], 3), ([0, 1, 1, 0], 5)])
def test_min_frames(label, frames):
    assert ctc.min_frames(label) == frames


def test_loss_matches_path_enumeration():
    rng = np.random.default_rng(0)
    for _ in range(50):
        T, C = rng.integers(1, 6), rng.integers(2, 4)
        probs = random_probs(rng, T, C)
        label = list(rng.integers(0, C - 1, size=rng.integers(0, 4)))
        loss, _ = ctc.ctc_loss(probs, label)
        p = ctc_brute_prob(probs, label)
        if p == 0:
            assert math.isinf(loss)
        else:
            assert math.exp(-loss) == pytest.approx(p, abs=1e-12)


def test_single_frame_hand_value():
    # the only path for label [0] over one frame is class 0
    probs = np.array([[0.25, 0.75]])
    loss, grad = ctc.ctc_loss(probs, [0])
    assert loss == pytest.approx(math.log(4))
    assert grad == pytest.approx(np.array([[-4.0, 0.0]]))


def test_two_frame_hand_value():
    # label [0] over two frames: paths 00, 0b, b0
    probs = np.array([[0.6, 0.4], [0.3, 0.7]])
    loss, _ = ctc.ctc_loss(probs, [0])
    assert math.exp(-loss) == pytest.approx(0.6 * 0.3 + 0.6 * 0.7 + 0.4 * 0.3)


def test_gamma_rows_sum_to_one():
    rng = np.random.default_rng(1)
    probs = random_probs(rng, 8, 4)
    _, gamma = ctc.ctc_posteriors(np.log(probs), [0, 1, 1])
    assert gamma.sum(axis=1) == pytest.approx(np.ones(8))


def test_infeasible_label_gives_inf_and_zero_grad():
    probs = np.full((2, 3), 1 / 3)
    loss, grad = ctc.ctc_loss(probs, [0, 0])
    assert math.isinf(loss)
    assert not grad.any()


def test_blank_label_rejected():
    with pytest.raises(ValueError):
        ctc.ctc_loss(np.full((3, 3), 1 / 3), [2])


def test_gradient_wrt_probs_central_differences():
    rng = np.random.default_rng(2)
    probs = random_probs(rng, 5, 3)
    label = [0, 1]
    _, grad = ctc.ctc_loss(probs, label)
    h = 1e-6
    for t in range(5):
        for k in range(3):
            up, dn = probs.copy(), probs.copy()
            up[t, k] += h
            dn[t, k] -= h
            num = (ctc.ctc_loss(up, label)[0] - ctc.ctc_loss(dn, label)[0]) / (2 * h)
            assert abs(num - grad[t, k]) <= 1e-6 * max(1.0, abs(num))


def test_greedy_decode_collapses_argmax_path():
    cs = Charset("ab")
    probs = np.array([[.9, .05, .05], [.9, .05, .05], [.1, .1, .8], [.8, .1, .1], [.1, .8, .1]])
    assert ctc.greedy_decode(probs, cs) == "aab"


def test_wide_beam_matches_exhaustive_ranking():
    rng = np.random.default_rng(3)
    cs = Charset("ab")
    for _ in range(30):
        T = int(rng.integers(1, 5))
        probs = random_probs(rng, T, 3)
        truth = ctc_brute_distribution(probs)
        hyps = ctc.beam_decode(probs, cs, beam_width=1000)
        assert len(hyps) == len(truth)
        for s, logp in hyps:
            assert math.exp(logp) == pytest.approx(truth[tuple(cs.encode(s))], abs=1e-12)
        ps = [lp for _, lp in hyps]
        assert ps == sorted(ps, reverse=True)


def test_width_one_beam_equals_greedy_on_peaked_rows():
    rng = np.random.default_rng(4)
    cs = Charset("ab")
    for _ in range(50):
        T = int(rng.integers(1, 7))
        probs = np.full((T, 3), 0.02)
        probs[np.arange(T), rng.integers(0, 3, size=T)] = 0.96
        assert ctc.beam_decode(probs, cs, beam_width=1)[0][0] == ctc.greedy_decode(probs, cs)


def test_width_one_beam_can_differ_from_greedy_on_flat_rows():
    # each row has a unique argmax, yet "b" keeps 0.5 * (0.44 + 0.11) = 0.275 of mass
    # while the greedy reading "ba" has only 0.5 * 0.45 = 0.225
    cs = Charset("ab")
    probs = np.array([[0.1, 0.5, 0.4], [0.45, 0.11, 0.44]])
    assert ctc.greedy_decode(probs, cs) == "ba"
    assert ctc.beam_decode(probs, cs, beam_width=1)[0][0] == "b"


def test_lexicon_beam_returns_only_words():
    cs = Charset("abc")
    trie = ctc.LexiconTrie(["ab", "ca", "zz"], cs)
    assert trie.skipped == ["zz"]
    assert len(trie) == 2
    rng = np.random.default_rng(5)
    probs = random_probs(rng, 6, 4)
    hyps = ctc.beam_decode(probs, cs, beam_width=20, lexicon=trie)
    assert {s for s, _ in hyps} <= {"ab", "ca"}
    truth = ctc_brute_distribution(probs)
    for s, lp in hyps:
        assert math.exp(lp) == pytest.approx(truth[tuple(cs.encode(s))], abs=1e-12)


def test_lexicon_overrides_greedy_misread():
    cs = Charset("abc")
    trie = ctc.LexiconTrie(["cab"], cs)
    probs = np.array([[.1, .1, .7, .1], [.6, .1, .2, .1], [.1, .45, .05, .4]])
    assert ctc.greedy_decode(probs, cs) == "cab"
    probs[2] = [.1, .3, .5, .1]
    assert ctc.greedy_decode(probs, cs) == "cac"
    assert ctc.beam_decode(probs, cs, 5, trie)[0][0] == "cab"


def test_beam_rejects_charset_mismatch():
    with pytest.raises(ValueError):
        ctc.beam_decode(np.full((2, 3), 1 / 3), Charset("abc"))


def test_logits_round_trip(tmp_path):
    rng = np.random.default_rng(6)
    probs = random_probs(rng, 7, 5)
    path = tmp_path / "l.bin"
    ctc.write_logits(path, probs)
    assert np.array_equal(ctc.read_logits(path), probs)
    data = path.read_bytes()
    assert data[:8] == (7).to_bytes(4, "little") + (5).to_bytes(4, "little")
    with pytest.raises(ValueError):
        ctc.decode_logits(data[:-1])
