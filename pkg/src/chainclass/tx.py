"""Signed transactions: the only mutation path into the ledger.

Wire layout (docs/protocol.md):

    sign_bytes = "CCTX/1" || u64(nonce) || pubkey(32) || from(20)
                 || contract(20) || enc_bytes(payload)
                 || u64(gas_limit) || u64(gas_price)
    wire       = sign_bytes || signature(64)
    tx_hash    = sha256(wire)

The sender's public key travels with the transaction because addresses are
hash-derived and cannot be inverted; ``from`` must equal the address derived
from the key. ``contract`` is the 20-byte target address, or the all-zero
DEPLOY sentinel. The payload is an enc_str method tag followed by the
method's canonically encoded arguments.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from chainclass import codec
from chainclass.codec import Reader
from chainclass.crypto import (
    ADDRESS_LEN,
    PUBKEY_LEN,
    SIGNATURE_LEN,
    KeyPair,
    derive_address,
    sha256,
    verify,
)
from chainclass.errors import BadSignature, NonCanonicalEncoding

TX_MAGIC = b"CCTX/1"
DEPLOY_ADDRESS = b"\x00" * ADDRESS_LEN


def encode_payload(method: str, args: bytes = b"") -> bytes:
    return codec.enc_str(method) + args


def decode_payload(payload: bytes) -> tuple:
    """Split a payload into (method, args). Args stay opaque at this layer."""
    r = Reader(payload)
    method = r.str_()
    return method, r.take(r.remaining)


@dataclass(frozen=True)
class SignedTransaction:
    nonce: int
    sender_pubkey: bytes
    sender: bytes
    contract: bytes
    payload: bytes
    gas_limit: int
    gas_price: int
    signature: bytes

    def signing_bytes(self) -> bytes:
        return (
            TX_MAGIC
            + codec.enc_u64(self.nonce)
            + self.sender_pubkey
            + self.sender
            + self.contract
            + codec.enc_bytes(self.payload)
            + codec.enc_u64(self.gas_limit)
            + codec.enc_u64(self.gas_price)
        )

    def wire(self) -> bytes:
        return self.signing_bytes() + self.signature

    @cached_property
    def tx_hash(self) -> bytes:
        return sha256(self.wire())

    @property
    def is_deploy(self) -> bool:
        return self.contract == DEPLOY_ADDRESS

    @property
    def method(self) -> str:
        return decode_payload(self.payload)[0]

    def max_fee(self) -> int:
        return self.gas_limit * self.gas_price


def sign_transaction(
    keypair: KeyPair,
    nonce: int,
    contract: bytes,
    payload: bytes,
    gas_limit: int,
    gas_price: int,
) -> SignedTransaction:
    """Build and sign a transaction. Signing is deterministic (Ed25519)."""
    unsigned = SignedTransaction(
        nonce=nonce,
        sender_pubkey=keypair.public_bytes,
        sender=keypair.address,
        contract=contract,
        payload=payload,
        gas_limit=gas_limit,
        gas_price=gas_price,
        signature=b"",
    )
    sig = keypair.sign(unsigned.signing_bytes())
    return SignedTransaction(
        nonce=nonce,
        sender_pubkey=keypair.public_bytes,
        sender=keypair.address,
        contract=contract,
        payload=payload,
        gas_limit=gas_limit,
        gas_price=gas_price,
        signature=sig,
    )


def verify_transaction(tx: SignedTransaction) -> None:
    """Raise BadSignature unless tx is signed by the key behind ``from``."""
    try:
        derived = derive_address(tx.sender_pubkey)
    except Exception:
        raise BadSignature("malformed sender public key") from None
    if derived != tx.sender:
        raise BadSignature("from address does not match sender public key")
    if not verify(tx.sender_pubkey, tx.signing_bytes(), tx.signature):
        raise BadSignature("signature does not verify")


def decode_transaction(data: bytes) -> SignedTransaction:
    """Strictly decode one transaction; any slack is NonCanonicalEncoding."""
    r = Reader(data)
    magic = r.take(len(TX_MAGIC))
    if magic != TX_MAGIC:
        raise NonCanonicalEncoding("bad transaction magic")
    tx = SignedTransaction(
        nonce=r.u64(),
        sender_pubkey=r.take(PUBKEY_LEN),
        sender=r.take(ADDRESS_LEN),
        contract=r.take(ADDRESS_LEN),
        payload=r.bytes_(),
        gas_limit=r.u64(),
        gas_price=r.u64(),
        signature=r.take(SIGNATURE_LEN),
    )
    r.expect_end()
    # The payload must itself start with a well-formed method tag.
    decode_payload(tx.payload)
    return tx
