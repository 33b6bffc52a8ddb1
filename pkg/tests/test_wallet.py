"""Encrypted keystore files: round trips, wrong keys, corrupt files."""

import json

import pytest

from chainclass import wallet
from chainclass.crypto import KeyPair, verify
from chainclass.errors import CorruptFile, LockedKeystore, WrongPassphrase

# small scrypt cost so the suite stays fast; the format is identical
FAST = dict(n=2**10, r=8, p=1)

KP = KeyPair.from_seed(b"\x61" * 32)


def make_keystore(passphrase="hunter2"):
    return wallet.create_keystore(KP, passphrase, **FAST)


def test_round_trip_signs_identically(tmp_path):
    ks = make_keystore()
    data = wallet.export_keystore(ks)
    again = wallet.import_keystore(data, "hunter2")
    assert again.address == KP.address
    msg = b"round 3 plan"
    assert again.sign_payload(msg) == KP.sign(msg)


def test_export_hides_key_material():
    data = wallet.export_keystore(make_keystore())
    assert KP.seed_bytes().hex().encode() not in data
    assert KP.seed_bytes() not in data
    doc = json.loads(data)
    assert doc["version"] == wallet.KEYSTORE_VERSION
    assert doc["crypto"]["kdf"] == "scrypt"
    assert doc["crypto"]["cipher"] == "aes-256-gcm"


def test_wrong_passphrase():
    data = wallet.export_keystore(make_keystore())
    with pytest.raises(WrongPassphrase):
        wallet.import_keystore(data, "hunter3")


def test_locked_keystore_refuses_to_sign():
    data = wallet.export_keystore(make_keystore())
    ks = wallet.parse_keystore(data)
    assert not ks.unlocked
    with pytest.raises(LockedKeystore):
        ks.sign_payload(b"m")
    with pytest.raises(LockedKeystore):
        ks.keypair()
    # a one-shot passphrase unlocks just that call
    assert ks.sign_payload(b"m", passphrase="hunter2") == KP.sign(b"m")


def test_unlock_then_sign():
    ks = wallet.parse_keystore(wallet.export_keystore(make_keystore()))
    ks.unlock("hunter2")
    assert ks.unlocked
    sig = ks.sign_payload(b"hello")
    assert verify(KP.public_bytes, b"hello", sig)


def test_tampered_ciphertext_rejected():
    from chainclass import codec

    doc = json.loads(wallet.export_keystore(make_keystore()))
    ct = bytearray(codec.from_hex(doc["crypto"]["ciphertext"]))
    ct[0] ^= 0x01
    doc["crypto"]["ciphertext"] = codec.to_hex(bytes(ct))
    with pytest.raises(WrongPassphrase):
        wallet.import_keystore(json.dumps(doc).encode(), "hunter2")


def test_identity_mismatch_rejected():
    # swap in another account's address; decryption works, identity fails
    doc = json.loads(wallet.export_keystore(make_keystore()))
    other = KeyPair.from_seed(b"\x62" * 32)
    doc["address"] = "0x" + other.address.hex()
    with pytest.raises(CorruptFile):
        wallet.import_keystore(json.dumps(doc).encode(), "hunter2")


@pytest.mark.parametrize("mutate", [
    lambda d: d.pop("crypto"),
    lambda d: d.__setitem__("version", 99),
    lambda d: d["crypto"].__setitem__("kdf", "pbkdf2"),
    lambda d: d["crypto"]["kdfparams"].pop("salt"),
    lambda d: d["crypto"].__setitem__("ciphertext", "0011"),  # below tag size
    lambda d: d.__setitem__("address", "zz"),
])
def test_structural_corruption_rejected(mutate):
    doc = json.loads(wallet.export_keystore(make_keystore()))
    mutate(doc)
    with pytest.raises(CorruptFile):
        wallet.parse_keystore(json.dumps(doc).encode())


def test_not_json_rejected():
    with pytest.raises(CorruptFile):
        wallet.parse_keystore(b"\x00\x01not json")


def test_save_load_file(tmp_path):
    path = tmp_path / "team1.keystore"
    wallet.save_keystore(path, make_keystore())
    locked = wallet.load_keystore(path)
    assert not locked.unlocked
    assert locked.address == KP.address
    unlocked = wallet.load_keystore(path, passphrase="hunter2")
    assert unlocked.unlocked


def test_generate_keypair_fresh_identity():
    ks, addr = wallet.generate_keypair("pw")
    assert ks.unlocked
    assert ks.address == addr
    assert addr != KP.address
    # two generations never share an address
    ks2, addr2 = wallet.generate_keypair("pw")
    assert addr2 != addr


def test_distinct_nonces_and_salts():
    a = json.loads(wallet.export_keystore(make_keystore()))
    b = json.loads(wallet.export_keystore(make_keystore()))
    assert a["crypto"]["kdfparams"]["salt"] != b["crypto"]["kdfparams"]["salt"]
    assert a["crypto"]["cipherparams"]["nonce"] != b["crypto"]["cipherparams"]["nonce"]
