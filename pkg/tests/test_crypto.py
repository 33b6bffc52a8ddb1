"""Key handling, signatures, and address derivation."""

import hashlib

import pytest
from hypothesis import given, strategies as st

from chainclass import crypto
from chainclass.errors import InvalidKey


def test_sha256_matches_hashlib():
    for msg in (b"", b"abc", b"\x00" * 100):
        assert crypto.sha256(msg) == hashlib.sha256(msg).digest()


def test_address_is_pubkey_hash_tail():
    kp = crypto.KeyPair.from_seed(b"\x01" * 32)
    digest = hashlib.sha256(kp.public_bytes).digest()
    assert kp.address == digest[-crypto.ADDRESS_LEN :]
    assert len(kp.address) == 20


def test_from_seed_deterministic():
    a = crypto.KeyPair.from_seed(b"\x07" * 32)
    b = crypto.KeyPair.from_seed(b"\x07" * 32)
    assert a.public_bytes == b.public_bytes
    assert a.address == b.address


def test_seed_round_trip():
    kp = crypto.KeyPair.generate()
    again = crypto.KeyPair.from_seed(kp.seed_bytes())
    assert again.public_bytes == kp.public_bytes


@given(st.binary(min_size=32, max_size=32), st.binary(max_size=100))
def test_sign_verify(seed, msg):
    kp = crypto.KeyPair.from_seed(seed)
    sig = kp.sign(msg)
    assert len(sig) == crypto.SIGNATURE_LEN
    assert crypto.verify(kp.public_bytes, msg, sig)


def test_signatures_deterministic():
    kp = crypto.KeyPair.from_seed(b"\x21" * 32)
    assert kp.sign(b"hello") == kp.sign(b"hello")


def test_verify_rejects_wrong_message():
    kp = crypto.KeyPair.from_seed(b"\x05" * 32)
    sig = kp.sign(b"paid")
    assert not crypto.verify(kp.public_bytes, b"void", sig)


def test_verify_rejects_flipped_sig_bits():
    kp = crypto.KeyPair.from_seed(b"\x05" * 32)
    msg = b"transfer 5"
    sig = bytearray(kp.sign(msg))
    sig[0] ^= 0x01
    assert not crypto.verify(kp.public_bytes, msg, bytes(sig))


def test_verify_rejects_wrong_key():
    a = crypto.KeyPair.from_seed(b"\x01" * 32)
    b = crypto.KeyPair.from_seed(b"\x02" * 32)
    assert not crypto.verify(b.public_bytes, b"m", a.sign(b"m"))


def test_bad_seed_length_raises():
    with pytest.raises(InvalidKey):
        crypto.KeyPair.from_seed(b"short")


def test_bad_pubkey_length():
    with pytest.raises(InvalidKey):
        crypto.derive_address(b"\x00" * 31)


def test_generated_addresses_distinct():
    # collision scan across fresh keys
    seen = {crypto.KeyPair.generate().address for _ in range(1000)}
    assert len(seen) == 1000


def test_derived_addresses_distinct_across_seeds():
    seen = {
        crypto.KeyPair.from_seed(i.to_bytes(32, "big")).address
        for i in range(1, 501)
    }
    assert len(seen) == 500
