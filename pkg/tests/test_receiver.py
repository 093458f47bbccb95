import csv

import numpy as np
import pytest
from sklearn.base import clone

from rsura.config import PowerProfile, SystemConfig
from rsura.phy import encode_users, superpose, transmit
from rsura.receiver import (
    DecodedEntry,
    DecodedList,
    IterativeGaussianReceiver,
    SicState,
    Truth,
    sic_subtract,
    write_diagnostics_csv,
)

UNIFORM = PowerProfile((1.0,), 4096)


def _channel(msgs, codebook, code, sigma2, seed=0, power=UNIFORM):
    frames = encode_users(msgs, 12, code, power)
    return frames, transmit(frames, codebook, sigma2, seed, 264)


@pytest.fixture
def receiver(full_codebook, code):
    def make(**kw):
        return IterativeGaussianReceiver(**kw).fit(full_codebook, code)
    return make


def test_noiseless_single_user(receiver, full_codebook, code, rng):
    msgs = rng.integers(0, 2, (1, 100), dtype=np.uint8)
    _, out = _channel(msgs, full_codebook, code, 0.0)
    rx = receiver(ka=1, sigma2=0.0)
    decoded = rx.predict(out)
    assert len(decoded) == 1
    assert np.array_equal(decoded.messages(100)[0], msgs[0])
    assert rx.diagnostics_[0].iterations == 1
    assert decoded.entries[0].sic_round == 0


def test_collision_is_not_verified(receiver, full_codebook, code):
    rng = np.random.default_rng(1)
    for _ in range(10):
        header = rng.integers(0, 2, 12, dtype=np.uint8)
        msgs = np.stack([np.concatenate([header, rng.integers(0, 2, 88, dtype=np.uint8)]) for _ in range(2)])
        _, out = _channel(msgs, full_codebook, code, 0.0)
        for genie in (False, True):
            decoded = receiver(ka=2, sigma2=0.0, genie_detect=genie).decode(out, Truth(msgs, 12))
            assert not any(m in decoded for m in msgs)


def test_sic_exact_under_genie_verification(receiver, full_codebook, code):
    cfg = SystemConfig(ebn0_db=6.0)
    msgs = np.random.default_rng(0).integers(0, 2, (25, 100), dtype=np.uint8)
    _, out = _channel(msgs, full_codebook, code, cfg.sigma2, seed=3)
    rx = IterativeGaussianReceiver.from_config(cfg, genie_detect=True, genie_verify=True)
    rx.fit(full_codebook, code)
    decoded = rx.decode(out, Truth(msgs, 12))
    assert len(decoded) == 25
    err = np.linalg.norm(rx.sic_state_.residual - out.noise) / np.linalg.norm(out.noise)
    assert err < 1e-9


def test_sic_subtract_examples(full_codebook, code, rng):
    frames, out = _channel(rng.integers(0, 2, (1, 100), dtype=np.uint8), full_codebook, code, 0.0)
    state = sic_subtract(SicState(out.y), frames, full_codebook)
    assert not state.residual.any()
    assert state.round == 1 and len(state.verified_frames) == 1
    same = sic_subtract(SicState(out.y), [], full_codebook)
    assert np.array_equal(same.residual, out.y)


def test_sic_subtract_matches_superposition(full_codebook, code, rng):
    frames, out = _channel(rng.integers(0, 2, (5, 100), dtype=np.uint8), full_codebook, code, 0.3)
    state = sic_subtract(SicState(out.y), frames[:2], full_codebook)
    np.testing.assert_allclose(state.residual, superpose(frames[2:], full_codebook, 264) + out.noise,
                               atol=1e-12)


def test_zero_users_give_empty_list(receiver):
    decoded = receiver(ka=3, sigma2=0.5).predict(np.zeros((114, 264)))
    assert len(decoded) == 0
    assert decoded.messages(100).shape == (0, 100)


def test_two_users_high_snr(receiver, full_codebook, code):
    msgs = np.random.default_rng(8).integers(0, 2, (2, 100), dtype=np.uint8)
    cfg = SystemConfig(ka=2, ebn0_db=8.0)
    _, out = _channel(msgs, full_codebook, code, cfg.sigma2, seed=8)
    rx = receiver(ka=2, sigma2=cfg.sigma2)
    decoded = rx.predict(out)
    assert sorted(map(bytes, decoded.messages(100))) == sorted(map(bytes, msgs))
    assert {e.sic_round for e in decoded} == {0}
    assert rx.diagnostics_[-1].n_detected == 0


def test_list_grows_across_rounds(receiver, full_codebook, code):
    cfg = SystemConfig(ebn0_db=1.5)
    msgs = np.random.default_rng(4).integers(0, 2, (25, 100), dtype=np.uint8)
    _, out = _channel(msgs, full_codebook, code, cfg.sigma2, seed=4)
    rx = IterativeGaussianReceiver.from_config(cfg).fit(full_codebook, code)
    decoded = rx.predict(out)
    rounds = [e.sic_round for e in decoded]
    assert rounds == sorted(rounds)
    assert len(rx.diagnostics_) <= cfg.max_sic_rounds
    assert all(d.iterations <= cfg.max_ese_iters for d in rx.diagnostics_)
    for d in rx.diagnostics_:
        assert d.verified == sorted(d.verified)


def test_decoded_list_deduplicates():
    bits = np.array([1, 0, 1, 1], dtype=np.uint8)
    lst = DecodedList()
    entry = DecodedEntry(bits, 0, 0, None)
    assert lst.add(entry) and not lst.add(DecodedEntry(bits.copy(), 0, 1, None))
    assert bits in lst and len(lst) == 1
    assert np.array([1, 0, 1, 0]) not in lst


def test_estimator_params_and_errors(full_codebook, code):
    cfg = SystemConfig(ka=150, ebn0_db=2.0)
    rx = IterativeGaussianReceiver.from_config(cfg, genie_detect=True)
    params = rx.get_params()
    assert params["ka"] == 150 and params["sigma2"] == cfg.sigma2 and params["genie_detect"]
    assert clone(rx).get_params() == params
    rx.fit(full_codebook, code, cfg.power)
    with pytest.raises(ValueError, match="ground truth"):
        rx.decode(np.zeros((114, 264)))
    with pytest.raises(ValueError):
        IterativeGaussianReceiver(ka=1).fit(full_codebook, code).predict(np.zeros((114, 100)))


def test_write_diagnostics_csv(receiver, full_codebook, code, rng, tmp_path):
    msgs = rng.integers(0, 2, (3, 100), dtype=np.uint8)
    _, out = _channel(msgs, full_codebook, code, 0.1)
    rx = receiver(ka=3, sigma2=0.1)
    rx.decode(out, Truth(msgs, 12))
    path = tmp_path / "diag.csv"
    write_diagnostics_csv(rx.diagnostics_, path)
    rows = list(csv.DictReader(open(path)))
    assert len(rows) == sum(d.iterations for d in rx.diagnostics_)
    assert rows[0]["iteration"] == "1"
