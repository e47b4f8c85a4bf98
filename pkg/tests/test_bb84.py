import math

import pytest
from hypothesis import given, settings, strategies as st

from qcpabe.bb84 import BB84Config, ChannelModel, _single_run, run_bb84
from qcpabe.errors import BB84Aborted, InsufficientSiftedBits
from qcpabe.quantum import RandomSource


def test_ideal_channel_has_no_errors_and_agrees():
    res = run_bb84(BB84Config.for_key(64), ChannelModel.IDEAL, RandomSource(3))
    assert res.qber == 0
    assert res.key_B == res.key_receiver
    assert len(res.key_B) == 64 and "1" in res.key_B


def test_guard_on_raw_count():
    assert BB84Config.min_raw_count(8, 0.5) == 64
    with pytest.raises(ValueError):
        BB84Config(8, 63)
    with pytest.raises(ValueError):
        BB84Config(8, 100, check_fraction=1.0)
    with pytest.raises(ValueError):
        BB84Config(0, 100)


def test_transcript_roles_account_for_every_photon():
    cfg = BB84Config(16, 200)
    res = run_bb84(cfg, ChannelModel.IDEAL, RandomSource(11))
    roles = [r.role for r in res.transcript]
    assert len(roles) == 200
    assert roles.count("checked") == res.checked_count == max(1, round(0.5 * res.sifted_count))
    assert roles.count("key") == 16
    for r in res.transcript:
        assert (r.role == "discarded") == (r.sender_basis != r.receiver_basis)


def test_intercept_resend_rate_near_quarter():
    cfg = BB84Config(8, 4000, qber_abort_threshold=0.99)
    res = run_bb84(cfg, ChannelModel.INTERCEPT_RESEND, RandomSource(5))
    assert abs(res.qber - 0.25) < 0.04


def test_abort_carries_result():
    with pytest.raises(BB84Aborted) as info:
        run_bb84(BB84Config(8, 1000), ChannelModel.INTERCEPT_RESEND, RandomSource(1))
    assert info.value.qber > 0.11
    assert info.value.result.aborted


def test_insufficient_sifted_bits():
    # the guard is an expectation; unlucky seeds fall short
    cfg = BB84Config(1, 8)
    short = 0
    for seed in range(200):
        try:
            run_bb84(cfg, ChannelModel.IDEAL, RandomSource(seed))
        except InsufficientSiftedBits:
            short += 1
    assert 0 < short < 200


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from([ChannelModel.IDEAL, ChannelModel.INTERCEPT_RESEND]))
def test_deterministic_given_seed(seed, channel):
    cfg = BB84Config(8, 400, qber_abort_threshold=0.99)
    a = run_bb84(cfg, channel, RandomSource(seed))
    b = run_bb84(cfg, channel, RandomSource(seed))
    assert a == b


@pytest.mark.parametrize("raw", [8, 16, 24, 32])
def test_detection_probability_with_zero_tolerance(raw):
    # With any mismatch aborting, a run checking k bits aborts with
    # probability 1 - (3/4)^k.  A single exchange is sampled: the all-zero
    # re-run in run_bb84 would give some runs a second chance to abort.
    trials = 400
    cfg = BB84Config(1, raw, qber_abort_threshold=0.0)
    root = RandomSource(raw)
    aborts, expected, var = 0, 0.0, 0.0
    for i in range(trials):
        res = _single_run(cfg, ChannelModel.INTERCEPT_RESEND, root.child(str(i)))
        aborts += res.aborted
        p = 1 - 0.75 ** res.checked_count
        assert res.checked_count <= 16
        expected += p
        var += p * (1 - p)
    assert abs(aborts - expected) <= 3 * math.sqrt(var) + 1
