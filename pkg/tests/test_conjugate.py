import pytest
from hypothesis import given, settings, strategies as st

from qcpabe.conjugate import (
    QubitCiphertext,
    agreement,
    bits_to_hex,
    decrypt,
    encrypt,
    hex_to_bits,
    random_pad,
)
from qcpabe.errors import LengthMismatch, RecordFormatError
from qcpabe.quantum import RandomSource

bitstrings = st.text("01", min_size=1, max_size=64)


@given(bitstrings, st.integers(0, 2**32))
def test_matching_bases_recover_message(msg, seed):
    rng = RandomSource(seed)
    b = "".join(map(str, rng.bits(len(msg))))
    assert decrypt(encrypt(msg, b), b, rng) == msg


def test_wrong_bases_give_coin_flips():
    rng = RandomSource(2)
    msg = "".join(map(str, rng.bits(4000)))
    b = "".join(map(str, rng.bits(4000)))
    wrong = "".join("1" if c == "0" else "0" for c in b)
    assert abs(agreement(decrypt(encrypt(msg, b), wrong, rng), msg) - 0.5) < 0.03


def test_longer_basis_string_is_truncated():
    assert decrypt(encrypt("101", "0101"), "0101", RandomSource(0)) == "101"
    with pytest.raises(LengthMismatch):
        encrypt("101", "01")
    with pytest.raises(LengthMismatch):
        decrypt(encrypt("101", "010"), "01", RandomSource(0))
    with pytest.raises(ValueError):
        encrypt("102", "000")


@settings(max_examples=30)
@given(bitstrings, st.integers(0, 2**32))
def test_pad_then_same_pad_restores(msg, seed):
    rng = RandomSource(seed)
    b = "".join(map(str, rng.bits(len(msg))))
    c = encrypt(msg, b)
    x, z = random_pad(len(msg), rng)
    assert decrypt(c.scrambled(x, z).scrambled(x, z), b, rng) == msg


@given(bitstrings, st.integers(0, 2**32))
def test_text_round_trip_pristine_and_scrambled(msg, seed):
    rng = RandomSource(seed)
    b = "".join(map(str, rng.bits(len(msg))))
    c = encrypt(msg, b)
    assert QubitCiphertext.from_text(c.to_text()) == c
    s = c.scrambled(*random_pad(len(msg), rng))
    assert QubitCiphertext.from_text(s.to_text()) == s


def test_text_rejects_bad_input():
    with pytest.raises(RecordFormatError):
        QubitCiphertext.from_text("")
    good = encrypt("10", "01").to_text()
    with pytest.raises(RecordFormatError):
        QubitCiphertext.from_text(good.replace("length 2", "length 3"))
    with pytest.raises(RecordFormatError):
        QubitCiphertext.from_text(good.replace("T Z1", "Q Z1"))


def test_hex_helpers():
    assert hex_to_bits("a5") == "10100101"
    assert bits_to_hex("10100101") == "a5"
    with pytest.raises(ValueError):
        bits_to_hex("101")
