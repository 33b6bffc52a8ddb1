"""Transaction encoding, signing, and tamper rejection."""

import dataclasses

import pytest
from hypothesis import given, strategies as st

from chainclass import codec, tx as tx_mod
from chainclass.crypto import KeyPair
from chainclass.errors import BadSignature, NonCanonicalEncoding
from chainclass.tx import decode_transaction, sign_transaction, verify_transaction

KP = KeyPair.from_seed(b"\x42" * 32)
OTHER = KeyPair.from_seed(b"\x43" * 32)
CONTRACT = b"\x99" * 20


def make_tx(nonce=0, method="noop", args=b"", gas_limit=50_000,
            gas_price=20_000_000_000, keypair=KP):
    payload = tx_mod.encode_payload(method, args)
    return sign_transaction(keypair, nonce, CONTRACT, payload, gas_limit, gas_price)


def test_wire_round_trip():
    tx = make_tx(nonce=3, args=b"abc")
    again = decode_transaction(tx.wire())
    assert again == tx
    assert again.tx_hash == tx.tx_hash
    verify_transaction(again)


@given(st.integers(0, 2**64 - 1), st.binary(max_size=64),
       st.integers(21_000, 10**6))
def test_wire_round_trip_random(nonce, args, gas_limit):
    tx = make_tx(nonce=nonce, args=args, gas_limit=gas_limit)
    assert decode_transaction(tx.wire()) == tx


def test_wire_starts_with_magic():
    assert make_tx().wire()[:6] == b"CCTX/1"


def test_signing_bytes_exclude_signature():
    tx = make_tx()
    assert tx.signature not in tx.signing_bytes()
    # same fields, different signature -> same signing bytes
    retagged = dataclasses.replace(tx, signature=b"\x00" * 64)
    assert retagged.signing_bytes() == tx.signing_bytes()


def test_sender_matches_embedded_pubkey():
    tx = make_tx()
    assert tx.sender == KP.address
    assert tx.sender_pubkey == KP.public_bytes
    forged = dataclasses.replace(tx, sender=OTHER.address)
    with pytest.raises(BadSignature):
        verify_transaction(forged)


@pytest.mark.parametrize("field,value", [
    ("nonce", 99),
    ("gas_limit", 99_999),
    ("gas_price", 1),
    ("contract", b"\x00" * 20),
    ("payload", tx_mod.encode_payload("plan", b"x")),
])
def test_any_field_tamper_breaks_signature(field, value):
    tx = make_tx()
    tampered = dataclasses.replace(tx, **{field: value})
    with pytest.raises(BadSignature):
        verify_transaction(tampered)


def test_flipped_signature_bit_rejected():
    tx = make_tx()
    sig = bytearray(tx.signature)
    sig[10] ^= 0x80
    with pytest.raises(BadSignature):
        verify_transaction(dataclasses.replace(tx, signature=bytes(sig)))


def test_trailing_bytes_rejected():
    data = make_tx().wire() + b"\x00"
    with pytest.raises(NonCanonicalEncoding):
        decode_transaction(data)


def test_truncated_rejected():
    data = make_tx().wire()
    with pytest.raises(NonCanonicalEncoding):
        decode_transaction(data[:-1])


def test_bad_magic_rejected():
    data = bytearray(make_tx().wire())
    data[0] ^= 0xFF
    with pytest.raises(NonCanonicalEncoding):
        decode_transaction(bytes(data))


def test_tx_hash_covers_signature():
    # two txs with identical fields from the same key are identical;
    # a different key yields a different hash even for equal payloads
    a = make_tx()
    b = make_tx()
    assert a.tx_hash == b.tx_hash
    c = make_tx(keypair=OTHER)
    assert c.tx_hash != a.tx_hash


def test_method_property():
    tx = make_tx(method="plan", args=b"\x01")
    assert tx.method == "plan"
    assert not tx.is_deploy
    deploy = sign_transaction(
        KP, 0, tx_mod.DEPLOY_ADDRESS,
        tx_mod.encode_payload("deploy", b""), 50_000, 1)
    assert deploy.is_deploy


def test_max_fee():
    tx = make_tx(gas_limit=33_000, gas_price=20_000_000_000)
    assert tx.max_fee() == 33_000 * 20_000_000_000


def test_payload_round_trip():
    p = tx_mod.encode_payload("respond", b"\x02")
    assert tx_mod.decode_payload(p) == ("respond", b"\x02")


def test_payload_args_are_raw_remainder():
    # args stay opaque at this layer; the wire format bounds the payload
    p = tx_mod.encode_payload("m", b"") + b"\x00\x01"
    assert tx_mod.decode_payload(p) == ("m", b"\x00\x01")


def test_signing_is_deterministic():
    assert make_tx().wire() == make_tx().wire()
