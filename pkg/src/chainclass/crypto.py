"""Hashing, Ed25519 keypairs, and address derivation.

Ed25519 (RFC 8032) signatures are deterministic: signing the same bytes with
the same key always yields the same 64 signature bytes, which the replicated
ledger relies on. Addresses are the trailing 20 bytes of the SHA-256 of the
32-byte public key.
"""

from __future__ import annotations

import hashlib

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)

from chainclass.errors import InvalidKey

ADDRESS_LEN = 20
PUBKEY_LEN = 32
SIGNATURE_LEN = 64
HASH_LEN = 32

ZERO_ADDRESS = b"\x00" * ADDRESS_LEN
ZERO_HASH = b"\x00" * HASH_LEN


def sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def derive_address(pubkey: bytes) -> bytes:
    """Trailing 20 bytes of sha256(pubkey). Raises InvalidKey on bad input."""
    if not isinstance(pubkey, bytes) or len(pubkey) != PUBKEY_LEN:
        raise InvalidKey(f"public key must be {PUBKEY_LEN} bytes")
    try:
        Ed25519PublicKey.from_public_bytes(pubkey)
    except Exception as exc:
        raise InvalidKey(str(exc)) from None
    return sha256(pubkey)[-ADDRESS_LEN:]


class KeyPair:
    """An Ed25519 signing key plus its derived address."""

    def __init__(self, private: Ed25519PrivateKey):
        self._private = private
        self.public_bytes = private.public_key().public_bytes_raw()
        self.address = derive_address(self.public_bytes)

    @classmethod
    def generate(cls) -> "KeyPair":
        return cls(Ed25519PrivateKey.generate())

    @classmethod
    def from_seed(cls, seed: bytes) -> "KeyPair":
        if len(seed) != 32:
            raise InvalidKey("seed must be 32 bytes")
        return cls(Ed25519PrivateKey.from_private_bytes(seed))

    def seed_bytes(self) -> bytes:
        return self._private.private_bytes_raw()

    def sign(self, message: bytes) -> bytes:
        return self._private.sign(message)


def verify(pubkey: bytes, message: bytes, signature: bytes) -> bool:
    """True iff signature is a valid Ed25519 signature of message."""
    if len(pubkey) != PUBKEY_LEN or len(signature) != SIGNATURE_LEN:
        return False
    try:
        key = Ed25519PublicKey.from_public_bytes(pubkey)
    except Exception:
        return False
    try:
        key.verify(signature, message)
        return True
    except InvalidSignature:
        return False
