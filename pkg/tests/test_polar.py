"""Construction, encoding and CRC tests against independent oracles."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polarbpl.polar import (CRC11_POLY, CodeSpec, ReliabilitySequence,
                            build_code, crc_attach, crc_check,
                            crc_check_batch, encode, gaussian_construct,
                            load_sequence, nr_sequence_1024, polar_transform)
from polarbpl.polar import _phi, _phi_inv

from util_reference import crc_remainder_bitwise, encode_u_bruteforce

CRC3_POLY = (1, 0, 1, 1)  # x^3 + x + 1


# ---------------------------------------------------------------------------
# CRC
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("poly", [CRC11_POLY, CRC3_POLY])
def test_crc_attach_matches_long_division(rng, poly):
    for K in (1, 5, 64):
        msgs = rng.integers(0, 2, (20, K), dtype=np.uint8)
        for msg in msgs:
            got = crc_attach(msg, poly)[K:]
            want = crc_remainder_bitwise(msg, poly)
            assert got.tolist() == want


def test_crc_attach_allzero_msg():
    out = crc_attach(np.zeros(16, dtype=np.uint8))
    assert not out.any()
    assert out.shape == (27,)


def test_crc_attach_single_one():
    msg = np.zeros(8, dtype=np.uint8)
    msg[3] = 1
    got = crc_attach(msg, CRC11_POLY)[8:]
    assert got.tolist() == crc_remainder_bitwise(msg, CRC11_POLY)


@given(st.lists(st.integers(0, 1), min_size=1, max_size=96))
def test_crc_roundtrip_passes(bits):
    msg = np.array(bits, dtype=np.uint8)
    assert crc_check(crc_attach(msg))


def test_crc_single_bit_flips_detected(rng):
    msg = rng.integers(0, 2, 24, dtype=np.uint8)
    info = crc_attach(msg)
    for i in range(info.shape[0]):
        bad = info.copy()
        bad[i] ^= 1
        assert not crc_check(bad)


def test_crc_check_allzero_true():
    assert crc_check(np.zeros(40, dtype=np.uint8))


def test_crc_empty_parity():
    msg = np.array([1, 0, 1], dtype=np.uint8)
    out = crc_attach(msg, (1,))
    assert out.tolist() == [1, 0, 1]
    assert crc_check(out, (1,))


def test_crc_check_batch_matches_scalar(rng):
    words = rng.integers(0, 2, (50, 30), dtype=np.uint8)
    batch = crc_check_batch(words)
    for row, flag in zip(words, batch):
        assert crc_check(row) == flag


# ---------------------------------------------------------------------------
# Transform and encoding
# ---------------------------------------------------------------------------

def test_transform_matches_kron_oracle(rng):
    for n in range(1, 7):
        u = rng.integers(0, 2, (10, 1 << n), dtype=np.uint8)
        want = np.array([encode_u_bruteforce(row) for row in u])
        assert np.array_equal(polar_transform(u), want)


def test_transform_worked_example_n8():
    u = np.array([0, 0, 0, 1, 0, 1, 0, 1], dtype=np.uint8)
    assert np.array_equal(polar_transform(u), encode_u_bruteforce(u))


def test_transform_self_inverse_exhaustive_n8():
    u = np.array([[(i >> j) & 1 for j in range(8)] for i in range(256)],
                 dtype=np.uint8)
    assert np.array_equal(polar_transform(polar_transform(u)), u)


def test_transform_linear_exhaustive_n8():
    u = np.array([[(i >> j) & 1 for j in range(8)] for i in range(256)],
                 dtype=np.uint8)
    x = polar_transform(u)
    pair = u[:, None, :] ^ u[None, :, :]
    want = x[:, None, :] ^ x[None, :, :]
    assert np.array_equal(polar_transform(pair.reshape(-1, 8)),
                          want.reshape(-1, 8))


def test_transform_last_unit_vector_gives_all_ones():
    for n in range(1, 7):
        u = np.zeros(1 << n, dtype=np.uint8)
        u[-1] = 1
        assert polar_transform(u).all()


def test_transform_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        polar_transform(np.zeros(6, dtype=np.uint8))


def test_transform_does_not_mutate_input(rng):
    u = rng.integers(0, 2, 16, dtype=np.uint8)
    before = u.copy()
    polar_transform(u)
    assert np.array_equal(u, before)


def test_encode_zero_msg_zero_codeword():
    code = build_code(4, 5, 11, gaussian_construct(4, 2.0))
    assert not encode(code, np.zeros(5, dtype=np.uint8)).any()


def test_encode_matches_bruteforce(rng):
    code = build_code(4, 5, 11, gaussian_construct(4, 2.0))
    for msg in rng.integers(0, 2, (20, 5), dtype=np.uint8):
        info = np.concatenate([msg, crc_remainder_bitwise(msg, code.crc_poly)])
        u = np.zeros(code.N, dtype=np.uint8)
        u[~code.frozen_mask] = info
        assert np.array_equal(encode(code, msg), encode_u_bruteforce(u))


def test_encode_batch_matches_single(rng):
    code = build_code(5, 10, 11, gaussian_construct(5, 2.0))
    msgs = rng.integers(0, 2, (8, 10), dtype=np.uint8)
    batch = encode(code, msgs)
    for msg, word in zip(msgs, batch):
        assert np.array_equal(encode(code, msg), word)


def test_encode_wrong_length_raises():
    code = build_code(4, 5, 0, gaussian_construct(4, 2.0))
    with pytest.raises(ValueError):
        encode(code, np.zeros(6, dtype=np.uint8))


# ---------------------------------------------------------------------------
# build_code / CodeSpec
# ---------------------------------------------------------------------------

@given(st.integers(2, 8), st.data())
@settings(max_examples=40)
def test_build_code_frozen_count(n, data):
    N = 1 << n
    P = data.draw(st.sampled_from([0, 11]) if N > 11 else st.just(0))
    K = data.draw(st.integers(1, N - P))
    code = build_code(n, K, P, gaussian_construct(n, 2.0))
    assert int(code.frozen_mask.sum()) == N - K - P
    assert code.K_prime == K + P


def test_build_code_unfreezes_most_reliable():
    seq = gaussian_construct(3, 2.0)
    code = build_code(3, 4, 0, seq)
    assert sorted(np.flatnonzero(~code.frozen_mask)) == sorted(seq.order[-4:])


def test_build_code_kprime_positions():
    code = build_code(3, 3, 1, gaussian_construct(3, 2.0), crc_poly=(1, 1))
    assert int((~code.frozen_mask).sum()) == 4


def test_build_code_errors():
    seq = gaussian_construct(3, 2.0)
    with pytest.raises(ValueError):
        build_code(3, 8, 11, seq)
    with pytest.raises(ValueError):
        build_code(4, 4, 0, seq)


def test_build_code_p0_empty_poly():
    code = build_code(3, 4, 0, gaussian_construct(3, 2.0))
    assert code.crc_poly == (1,)


def test_codespec_config_roundtrip():
    code = build_code(5, 10, 11, gaussian_construct(5, 2.0))
    back = CodeSpec.from_config(code.to_config())
    assert back.n == code.n and back.K == code.K and back.P == code.P
    assert back.crc_poly == code.crc_poly
    assert np.array_equal(back.frozen_mask, code.frozen_mask)


def test_codespec_validation():
    mask = np.zeros(8, dtype=bool)
    mask[:3] = True
    with pytest.raises(ValueError):
        CodeSpec(n=3, N=8, K=4, P=0, K_prime=5, frozen_mask=mask, crc_poly=(1,))
    with pytest.raises(ValueError):
        CodeSpec(n=3, N=8, K=4, P=1, K_prime=5, frozen_mask=mask,
                 crc_poly=(1, 0))  # trailing coefficient 0
    with pytest.raises(ValueError):
        CodeSpec(n=3, N=16, K=4, P=1, K_prime=5, frozen_mask=mask,
                 crc_poly=(1, 1))


# ---------------------------------------------------------------------------
# Reliability sequences
# ---------------------------------------------------------------------------

def test_load_sequence_roundtrip(tmp_path):
    path = tmp_path / "seq.txt"
    path.write_text("2\n\n0\n3\n1\n")
    seq = load_sequence(path)
    assert seq.order.tolist() == [2, 0, 3, 1]


def test_load_sequence_bad_line(tmp_path):
    path = tmp_path / "seq.txt"
    path.write_text("0\nx\n1\n")
    with pytest.raises(ValueError, match="line 2"):
        load_sequence(path)


def test_load_sequence_not_permutation(tmp_path):
    path = tmp_path / "seq.txt"
    path.write_text("0\n0\n1\n")
    with pytest.raises(ValueError, match="permutation"):
        load_sequence(path)


def test_sequence_rejects_non_permutation():
    with pytest.raises(ValueError):
        ReliabilitySequence(np.array([0, 2, 2]))


def test_nr_sequence_shape():
    seq = nr_sequence_1024()
    assert len(seq) == 1024
    assert seq.order[0] == 0 and seq.order[-1] == 1023


# ---------------------------------------------------------------------------
# Gaussian-approximation construction
# ---------------------------------------------------------------------------

def test_ga_small_order_matches_nr():
    ga = gaussian_construct(3, 2.0).order.tolist()
    nr = [i for i in nr_sequence_1024().order.tolist() if i < 8]
    assert ga == nr


def test_ga_extreme_channels():
    for n in (1, 2, 3, 6, 10):
        order = gaussian_construct(n, 2.0).order
        assert order[0] == 0
        assert order[-1] == (1 << n) - 1


def test_ga_respects_binary_domination():
    # if i's support is a subset of j's, channel j is at least as reliable
    for n in (3, 4, 5, 6):
        order = gaussian_construct(n, 2.0).order
        rank = np.empty(1 << n, dtype=np.int64)
        rank[order] = np.arange(1 << n)
        for j in range(1 << n):
            for i in range(1 << n):
                if i != j and (i & j) == i:
                    assert rank[i] <= rank[j]


def test_ga_agrees_with_nr_on_worst_half():
    ga = gaussian_construct(10, 2.0).order
    nr = nr_sequence_1024().order
    overlap = len(set(ga[:512].tolist()) & set(nr[:512].tolist()))
    assert overlap >= 460


def test_phi_inv_round_trip():
    x = np.array([0.05, 0.5, 3.0, 9.9, 10.1, 30.0, 80.0])
    assert np.allclose(_phi_inv(_phi(x)), x, rtol=1e-9)


def test_phi_monotone_within_branches():
    lo = np.linspace(0.01, 10.0 - 1e-6, 2000)
    hi = np.linspace(10.0, 40.0, 2000)
    assert (np.diff(_phi(lo)) < 0).all()
    assert (np.diff(_phi(hi)) < 0).all()


def test_phi_branch_seam_jump_small():
    below, above = _phi(np.array([10.0 - 1e-9])), _phi(np.array([10.0 + 1e-9]))
    assert abs(above[0] - below[0]) / below[0] < 0.03
