"""Encrypted keystores and local signing.

A keystore file is JSON: the address and public key in the clear, the
Ed25519 seed encrypted with AES-256-GCM under a scrypt-derived key. KDF
parameters travel inside the file, so they can be strengthened later
without breaking old files. Wrong passphrases fail the GCM tag check;
they can never decrypt to a wrong key silently.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Optional

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from cryptography.hazmat.primitives.kdf.scrypt import Scrypt

from chainclass import codec
from chainclass.crypto import KeyPair
from chainclass.errors import (
    CorruptFile, LockedKeystore, NonCanonicalEncoding, WrongPassphrase,
)

KEYSTORE_VERSION = 1
# scrypt cost parameters; memory-hard (~16 MiB at these settings)
SCRYPT_N = 2**14
SCRYPT_R = 8
SCRYPT_P = 1
KEY_LEN = 32
NONCE_LEN = 12


def _derive_key(passphrase: str, salt: bytes, n: int, r: int, p: int) -> bytes:
    kdf = Scrypt(salt=salt, length=KEY_LEN, n=n, r=r, p=p)
    return kdf.derive(passphrase.encode("utf-8"))


@dataclass
class Keystore:
    """One account's encrypted key file plus its in-memory unlock state."""

    doc: dict
    _keypair: Optional[KeyPair] = field(default=None, repr=False)

    @property
    def address(self) -> bytes:
        return codec.from_hex(self.doc["address"])

    @property
    def public_key(self) -> bytes:
        return codec.from_hex(self.doc["pubkey"])

    @property
    def unlocked(self) -> bool:
        return self._keypair is not None

    def lock(self) -> None:
        self._keypair = None

    def unlock(self, passphrase: str) -> KeyPair:
        """Decrypt the seed; WrongPassphrase if the GCM tag fails."""
        if self._keypair is not None:
            return self._keypair
        crypto = self.doc["crypto"]
        params = crypto["kdfparams"]
        key = _derive_key(
            passphrase,
            codec.from_hex(params["salt"]),
            int(params["n"]), int(params["r"]), int(params["p"]),
        )
        nonce = codec.from_hex(crypto["cipherparams"]["nonce"])
        ciphertext = codec.from_hex(crypto["ciphertext"])
        try:
            seed = AESGCM(key).decrypt(nonce, ciphertext, None)
        except InvalidTag:
            raise WrongPassphrase("passphrase does not authenticate")
        keypair = KeyPair.from_seed(seed)
        if keypair.address != self.address or keypair.public_bytes != self.public_key:
            raise CorruptFile("decrypted key does not match stored identity")
        self._keypair = keypair
        return keypair

    def sign_payload(self, payload: bytes, passphrase: Optional[str] = None) -> bytes:
        """Sign raw bytes; needs an unlocked keystore or a passphrase."""
        if self._keypair is None:
            if passphrase is None:
                raise LockedKeystore("unlock first or pass a passphrase")
            self.unlock(passphrase)
        return self._keypair.sign(payload)

    def keypair(self) -> KeyPair:
        if self._keypair is None:
            raise LockedKeystore("keystore is locked")
        return self._keypair


def create_keystore(keypair: KeyPair, passphrase: str, *,
                    n: int = SCRYPT_N, r: int = SCRYPT_R,
                    p: int = SCRYPT_P) -> Keystore:
    """Encrypt an existing keypair's seed into a fresh keystore."""
    salt = os.urandom(16)
    nonce = os.urandom(NONCE_LEN)
    key = _derive_key(passphrase, salt, n, r, p)
    ciphertext = AESGCM(key).encrypt(nonce, keypair.seed_bytes(), None)
    doc = {
        "version": KEYSTORE_VERSION,
        "address": codec.to_hex(keypair.address),
        "pubkey": codec.to_hex(keypair.public_bytes),
        "crypto": {
            "kdf": "scrypt",
            "kdfparams": {
                "n": n, "r": r, "p": p,
                "dklen": KEY_LEN,
                "salt": codec.to_hex(salt),
            },
            "cipher": "aes-256-gcm",
            "cipherparams": {"nonce": codec.to_hex(nonce)},
            "ciphertext": codec.to_hex(ciphertext),
        },
    }
    return Keystore(doc=doc, _keypair=keypair)


def generate_keypair(passphrase: str) -> tuple:
    """Fresh random account, returned unlocked with its address."""
    keystore = create_keystore(KeyPair.generate(), passphrase)
    return keystore, keystore.address


def export_keystore(keystore: Keystore) -> bytes:
    """Serialize to file bytes; never includes plaintext key material."""
    return (json.dumps(keystore.doc, indent=2, sort_keys=True) + "\n").encode()


def _require(condition: bool, reason: str) -> None:
    if not condition:
        raise CorruptFile(reason)


def parse_keystore(data: bytes) -> Keystore:
    """Parse and validate file bytes without unlocking."""
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptFile(f"not a keystore file: {exc}")
    _require(isinstance(doc, dict), "top level must be an object")
    _require(doc.get("version") == KEYSTORE_VERSION,
             f"unsupported version {doc.get('version')!r}")
    crypto = doc.get("crypto")
    _require(isinstance(crypto, dict), "missing crypto section")
    _require(crypto.get("kdf") == "scrypt",
             f"unsupported kdf {crypto.get('kdf')!r}")
    _require(crypto.get("cipher") == "aes-256-gcm",
             f"unsupported cipher {crypto.get('cipher')!r}")
    params = crypto.get("kdfparams")
    _require(isinstance(params, dict), "missing kdfparams")
    for name in ("n", "r", "p", "dklen", "salt"):
        _require(name in params, f"kdfparams missing {name!r}")
    try:
        address = codec.from_hex(doc["address"])
        pubkey = codec.from_hex(doc["pubkey"])
        salt = codec.from_hex(params["salt"])
        nonce = codec.from_hex(crypto["cipherparams"]["nonce"])
        ciphertext = codec.from_hex(crypto["ciphertext"])
    except (KeyError, TypeError, ValueError, NonCanonicalEncoding) as exc:
        raise CorruptFile(f"bad field encoding: {exc}")
    _require(len(address) == 20, "address must be 20 bytes")
    _require(len(pubkey) == 32, "public key must be 32 bytes")
    _require(len(salt) >= 8, "salt too short")
    _require(len(nonce) == NONCE_LEN, "nonce must be 12 bytes")
    # GCM tag alone is 16 bytes; anything shorter was truncated
    _require(len(ciphertext) > 16, "ciphertext truncated")
    return Keystore(doc=doc)


def import_keystore(data: bytes, passphrase: str) -> Keystore:
    """Parse file bytes and unlock; round-trips export_keystore exactly."""
    keystore = parse_keystore(data)
    keystore.unlock(passphrase)
    return keystore


def save_keystore(path, keystore: Keystore) -> None:
    with open(path, "wb") as fh:
        fh.write(export_keystore(keystore))


def load_keystore(path, passphrase: Optional[str] = None) -> Keystore:
    """Read a keystore file; unlocks only if a passphrase is given."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise CorruptFile(f"cannot read {path}: {exc}")
    keystore = parse_keystore(data)
    if passphrase is not None:
        keystore.unlock(passphrase)
    return keystore
