"""Channel model, LLR scaling and fixed-point quantizer tests."""
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from polarbpl.channel import (ChannelParams, Q7_2, Quantizer, channel_llr,
                              noise_sigma, quantize, simulate_frames,
                              transmit)
from polarbpl.polar import build_code, encode, gaussian_construct


# ---------------------------------------------------------------------------
# Quantizer
# ---------------------------------------------------------------------------

def test_q72_extents():
    assert Q7_2.lsb == 0.25
    assert Q7_2.q_min == -16.0
    assert Q7_2.q_max == 15.75


@pytest.mark.parametrize("x,want", [
    (0.10, 0.0),
    (0.125, 0.25),     # tie rounds away from zero
    (-0.125, -0.25),
    (0.30, 0.25),
    (15.9, 15.75),     # saturation
    (-1e9, -16.0),
    (1e9, 15.75),
    (0.0, 0.0),
])
def test_quantize_examples(x, want):
    assert quantize(x, Q7_2) == want


@given(st.floats(-100.0, 100.0, allow_nan=False))
def test_quantize_idempotent(x):
    once = quantize(x, Q7_2)
    assert quantize(once, Q7_2) == once


@given(st.floats(-20.0, 20.0), st.floats(-20.0, 20.0))
def test_quantize_monotone(a, b):
    if a <= b:
        assert quantize(a, Q7_2) <= quantize(b, Q7_2)


@given(st.floats(-15.8, 15.7))
def test_quantize_within_half_lsb_in_range(x):
    assert abs(quantize(x, Q7_2) - x) <= Q7_2.lsb / 2 + 1e-12


def test_quantize_output_on_grid(rng):
    x = rng.normal(0, 8, 1000)
    q = quantize(x, Q7_2)
    assert np.allclose(q / Q7_2.lsb, np.round(q / Q7_2.lsb))
    assert q.min() >= Q7_2.q_min and q.max() <= Q7_2.q_max


def test_quantizer_validation():
    with pytest.raises(ValueError):
        Quantizer(1, 0)
    with pytest.raises(ValueError):
        Quantizer(7, 7)


# ---------------------------------------------------------------------------
# Channel
# ---------------------------------------------------------------------------

def test_noise_sigma_formula():
    # sigma^2 = 1 / (2 R 10^(snr/10))
    assert noise_sigma(0.0, 0.5) == pytest.approx(1.0)
    assert noise_sigma(3.0103, 1.0) == pytest.approx(0.5, rel=1e-4)


def test_llr_scaling_example():
    # operating point with sigma^2 = 0.5: y = 0.5 maps to llr = 2.0
    params = ChannelParams(snr_db=3.0103, rate=0.5, seed=0)
    assert noise_sigma(params.snr_db, params.rate) ** 2 == pytest.approx(0.5, rel=1e-4)
    assert channel_llr(np.array([0.5]), params)[0] == pytest.approx(2.0, rel=1e-4)


def test_llr_is_2y_over_sigma2(rng):
    params = ChannelParams(snr_db=2.0, rate=0.25, seed=0)
    y = rng.normal(0, 1, 100)
    s2 = noise_sigma(2.0, 0.25) ** 2
    assert np.allclose(channel_llr(y, params), 2.0 * y / s2)


def test_channel_params_validation():
    with pytest.raises(ValueError):
        ChannelParams(snr_db=1.0, rate=0.0, seed=0)
    with pytest.raises(ValueError):
        ChannelParams(snr_db=1.0, rate=1.5, seed=0)


def test_transmit_bpsk_mapping_and_determinism():
    params = ChannelParams(snr_db=30.0, rate=0.5, seed=3)
    word = np.array([0, 1, 0, 1], dtype=np.uint8)
    y1, y2 = transmit(word, params), transmit(word, params)
    assert np.array_equal(y1, y2)
    # at 30 dB the noise is tiny; signs follow 1 - 2x
    assert np.array_equal(np.sign(y1), np.array([1.0, -1.0, 1.0, -1.0]))


def test_noise_variance_within_one_percent():
    params = ChannelParams(snr_db=2.0, rate=0.5, seed=11)
    sigma = noise_sigma(2.0, 0.5)
    y = transmit(np.zeros(10 ** 6, dtype=np.uint8), params)
    noise = y - 1.0
    assert abs(noise.var() / sigma ** 2 - 1.0) < 0.01
    assert abs(noise.mean()) < 5e-3


# ---------------------------------------------------------------------------
# Frame simulation
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def small_code():
    return build_code(4, 5, 0, gaussian_construct(4, 2.0))


def test_simulate_frames_deterministic(small_code):
    params = ChannelParams(snr_db=2.0, rate=0.5, seed=7)
    a = simulate_frames(small_code, params, np.arange(10))
    b = simulate_frames(small_code, params, np.arange(10))
    assert np.array_equal(a.msgs, b.msgs)
    assert np.array_equal(a.llrs, b.llrs)


def test_simulate_frames_substream_isolation(small_code):
    # any frame decodes to the same data whether generated alone or in a batch
    params = ChannelParams(snr_db=2.0, rate=0.5, seed=7)
    batch = simulate_frames(small_code, params, np.arange(20))
    solo = simulate_frames(small_code, params, np.array([13]))
    assert np.array_equal(solo.msgs[0], batch.msgs[13])
    assert np.array_equal(solo.llrs[0], batch.llrs[13])


def test_simulate_frames_codewords_consistent(small_code):
    params = ChannelParams(snr_db=2.0, rate=0.5, seed=5)
    fb = simulate_frames(small_code, params, np.arange(6))
    assert np.array_equal(fb.codewords, encode(small_code, fb.msgs))


def test_simulate_frames_quantizer_applied(small_code):
    params = ChannelParams(snr_db=2.0, rate=0.5, seed=5)
    raw = simulate_frames(small_code, params, np.arange(6))
    q = simulate_frames(small_code, params, np.arange(6), quantizer=Q7_2)
    assert np.array_equal(q.llrs, quantize(raw.llrs, Q7_2))


def test_simulate_frames_seed_changes_data(small_code):
    p1 = ChannelParams(snr_db=2.0, rate=0.5, seed=1)
    p2 = ChannelParams(snr_db=2.0, rate=0.5, seed=2)
    a = simulate_frames(small_code, p1, np.arange(10))
    b = simulate_frames(small_code, p2, np.arange(10))
    assert not np.array_equal(a.llrs, b.llrs)
