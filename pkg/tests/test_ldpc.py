import itertools
import math

import numpy as np
import pytest

from rsura.ldpc import (
    LLR_CLIP,
    AlistError,
    decode_siso,
    encode,
    gf2_rank,
    hard_decision,
    load_alist,
    read_alist,
    syndrome_check,
    to_alist,
)
from rsura.phy import bpsk

from .conftest import DATA


def _syndrome_oracle(h, words):
    # plain integer matrix product, reduced mod 2
    return (np.atleast_2d(words).astype(np.int64) @ h.T.astype(np.int64)) % 2


def _reference_bp(llr, h, iters):
    """Dense flooding sum-product used as an independent oracle."""
    llr = np.clip(llr, -LLR_CLIP, LLR_CLIP)
    mask = h.astype(bool)
    t_max = math.tanh(LLR_CLIP / 2)
    v2c = np.where(mask, llr[None, :], 0.0)
    post = llr.copy()
    for _ in range(iters):
        t = np.where(mask, np.tanh(0.5 * v2c), 1.0)
        c2v = np.zeros_like(v2c)
        for c, v in zip(*np.nonzero(mask)):
            others = np.delete(t[c], v)
            c2v[c, v] = 2.0 * math.atanh(np.clip(np.prod(others), -t_max, t_max))
        post = llr + c2v.sum(axis=0)
        if np.all(post != 0) and not _syndrome_oracle(h, post < 0).any():
            return post, True
        v2c = np.where(mask, np.clip(post[None, :] - c2v, -LLR_CLIP, LLR_CLIP), 0.0)
    return post, False


def test_shipped_code_dimensions(code):
    assert (code.rows, code.cols) == (176, 264)
    assert code.rank == 176 and code.k == 88
    assert code.is_systematic


def test_hamming_rank(hamming):
    assert gf2_rank(hamming.h) == 3
    assert hamming.k == 4


def test_gf2_rank_hand_values():
    assert gf2_rank(np.array([[1, 1], [1, 1]])) == 1
    assert gf2_rank(np.eye(5, dtype=np.uint8)) == 5
    assert gf2_rank(np.array([[1, 1, 0], [0, 1, 1], [1, 0, 1]])) == 2


def test_alist_round_trip(hamming, code):
    for c in (hamming, code):
        back = load_alist(to_alist(c))
        assert np.array_equal(back.h, c.h)


def test_truncated_alist_is_an_error():
    text = (DATA / "hamming74.alist").read_text().splitlines()
    with pytest.raises(AlistError):
        load_alist("\n".join(text[:-2]))
    with pytest.raises(AlistError):
        load_alist("7 3\n")


def test_alist_dimension_check():
    with pytest.raises(AlistError):
        read_alist(DATA / "hamming74.alist", rows=4, cols=7)


def test_zero_payload_encodes_to_zero(code):
    assert not encode(np.zeros(88, dtype=np.uint8), code).any()


def test_encode_is_systematic_and_linear(code, rng):
    u1, u2 = rng.integers(0, 2, (2, 88), dtype=np.uint8)
    c1, c2 = encode(u1, code), encode(u2, code)
    assert np.array_equal(c1[:88], u1)
    assert np.array_equal(c1 ^ c2, encode(u1 ^ u2, code))


def test_encode_syndrome_round_trip(code, rng):
    payloads = rng.integers(0, 2, (10_000, 88), dtype=np.uint8)
    words = encode(payloads, code)
    assert np.array_equal(words[:, :88], payloads)
    assert not _syndrome_oracle(code.h, words).any()
    assert syndrome_check(words, code).all()


def test_syndrome_check_examples(code, rng):
    word = encode(rng.integers(0, 2, 88, dtype=np.uint8), code)
    assert syndrome_check(word, code) is True
    assert syndrome_check(np.zeros(264, dtype=np.uint8), code) is True
    for pos in rng.choice(264, 20, replace=False):
        bad = word.copy()
        bad[pos] ^= 1
        assert syndrome_check(bad, code) is False


def test_bp_noiseless_all_zero(code):
    post, ok = decode_siso(np.full(264, 20.0), code)
    assert ok
    assert not hard_decision(post).any()


def test_bp_corrects_single_weak_error(code, rng):
    word = encode(rng.integers(0, 2, 88, dtype=np.uint8), code)
    for pos in rng.choice(264, 25, replace=False):
        llr = 20.0 * bpsk(word)
        llr[pos] = -2.0 * np.sign(llr[pos])
        post, ok = decode_siso(llr, code)
        assert ok
        assert np.array_equal(hard_decision(post), word)


def test_bp_zero_input_is_undecided(code):
    post, ok = decode_siso(np.zeros(264), code)
    assert not ok
    assert not post.any()


def test_bp_llr_sign_convention(code):
    # positive LLR means bit 0
    post, _ = decode_siso(np.full(264, 5.0), code)
    assert (post > 0).all()


def test_bp_batch_matches_single(code, rng):
    words = encode(rng.integers(0, 2, (6, 88), dtype=np.uint8), code)
    llr = 1.2 * bpsk(words) + rng.standard_normal(words.shape) * 1.5
    post, ok = decode_siso(llr, code, bp_iters=15)
    for i in range(6):
        p, o = decode_siso(llr[i], code, bp_iters=15)
        assert o == ok[i]
        assert np.array_equal(p, post[i])


def test_bp_matches_dense_reference(hamming, code, rng):
    for c, n_words in ((hamming, 30), (code, 3)):
        words = encode(rng.integers(0, 2, (n_words, c.k), dtype=np.uint8), c)
        llr = 1.0 * bpsk(words) + rng.standard_normal(words.shape) * 1.2
        post, ok = decode_siso(llr, c, bp_iters=8)
        for i in range(n_words):
            ref, ref_ok = _reference_bp(llr[i], c.h, 8)
            assert ok[i] == ref_ok
            np.testing.assert_allclose(post[i], ref, rtol=1e-9, atol=1e-9)


def _hamming_codewords(code):
    return encode(np.array(list(itertools.product([0, 1], repeat=4)), dtype=np.uint8), code)


def test_redundant_hamming_is_the_same_code(hamming, hamming_full):
    assert hamming_full.rank == 3 and hamming_full.k == 4
    assert np.array_equal(_hamming_codewords(hamming), _hamming_codewords(hamming_full))


def test_bp_matches_ml_on_hamming(hamming_full):
    hamming = hamming_full
    codewords = _hamming_codewords(hamming)
    signs = bpsk(codewords)
    # exhaustive ML: the codeword with the largest correlation to the channel LLRs
    for word in codewords:
        for pos in range(7):
            llr = 6.0 * bpsk(word)
            llr[pos] = -llr[pos]
            ml = codewords[np.argmax(signs @ llr)]
            post, ok = decode_siso(llr, hamming)
            assert ok
            assert np.array_equal(hard_decision(post), ml)
            assert np.array_equal(ml, word)


def test_saturated_llr_never_flips(code, rng):
    for _ in range(20):
        word = encode(rng.integers(0, 2, 88, dtype=np.uint8), code)
        llr = 0.8 * bpsk(word) + rng.standard_normal(264) * 1.5
        pinned = rng.choice(264, 10, replace=False)
        llr[pinned] = np.inf * bpsk(word[pinned])
        post, _ = decode_siso(llr, code)
        assert np.all(np.sign(post[pinned]) == bpsk(word[pinned]))


def test_decoder_input_validation(code):
    with pytest.raises(ValueError):
        decode_siso(np.zeros(100), code)
    with pytest.raises(ValueError):
        decode_siso(np.zeros(264), code, bp_iters=0)
